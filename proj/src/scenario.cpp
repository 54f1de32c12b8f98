// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "skyfuse/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "skyfuse/geometry.hpp"
#include "skyfuse/rng.hpp"

namespace skyfuse {

namespace {

// RNG stream labels. Every consumer of the scenario seed splits through one
// of these, so truth generation and each detector emulation never share a
// stream.
constexpr std::uint64_t kTruthStream = 0x5452555448ull;     // "TRUTH"
constexpr std::uint64_t kDetectorStream = 0x444554454354ull;  // "DETECT"

void validate_config(const ScenarioConfig& cfg, const ClassRegistry& registry) {
  if (cfg.n_frames < 0) throw ValidationError("frame count must be >= 0");
  if (cfg.image_width <= 0 || cfg.image_height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  if (cfg.min_aircraft_per_frame < 0 ||
      cfg.max_aircraft_per_frame < cfg.min_aircraft_per_frame) {
    throw ValidationError("aircraft-per-frame range is empty");
  }
  if (!(cfg.min_box_side_px > 0.0) ||
      cfg.max_box_side_px < cfg.min_box_side_px) {
    throw ValidationError("box side range is empty or non-positive");
  }
  if (cfg.max_box_side_px > cfg.image_width ||
      cfg.max_box_side_px > cfg.image_height) {
    throw ValidationError("boxes must fit inside the image");
  }
  if (static_cast<int>(cfg.class_distribution.size()) != registry.size()) {
    throw ValidationError("class distribution size must match the registry");
  }
  double sum = 0.0;
  for (double p : cfg.class_distribution) {
    if (p < 0.0) throw ValidationError("class probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("class distribution must sum to 1");
  }
  if (cfg.min_aircraft_altitude_m > cfg.max_aircraft_altitude_m) {
    throw ValidationError("aircraft altitude range is empty");
  }
}

int sample_class(Rng& rng, const std::vector<double>& distribution) {
  const double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t k = 0; k < distribution.size(); ++k) {
    cum += distribution[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(distribution.size()) - 1;
}

}  // namespace

DetectorProfile fast_profile() {
  DetectorProfile p;
  p.model_id = "fast";
  p.p_detect_small = 0.92;
  p.p_detect_large = 0.96;
  p.area_breakpoint_px2 = 2304.0;
  p.box_noise_sigma_px = 3.5;
  p.false_positives_per_frame = 0.6;
  p.confidence_sigma = 0.12;
  return p;
}

DetectorProfile precise_profile() {
  DetectorProfile p;
  p.model_id = "precise";
  p.p_detect_small = 0.35;
  p.p_detect_large = 0.98;
  p.area_breakpoint_px2 = 2304.0;
  p.box_noise_sigma_px = 1.0;
  p.false_positives_per_frame = 0.15;
  p.confidence_sigma = 0.08;
  return p;
}

CameraModel scenario_camera(const ScenarioConfig& config) {
  return CameraModel::make(
      1000.0, 1000.0, config.image_width / 2.0, config.image_height / 2.0,
      config.image_width, config.image_height,
      GeoCoordinate{40.0, 116.0, 800.0}, /*yaw=*/0.0, /*pitch=*/-90.0,
      /*roll=*/0.0);
}

GroundTruthSet generate_scenario(const ScenarioConfig& config,
                                 const ClassRegistry& registry) {
  validate_config(config, registry);
  const CameraModel camera = scenario_camera(config);

  GroundTruthSet out;
  out.image_width = config.image_width;
  out.image_height = config.image_height;
  out.frames.reserve(static_cast<std::size_t>(config.n_frames));

  for (int f = 0; f < config.n_frames; ++f) {
    Rng rng(config.seed, {kTruthStream, static_cast<std::uint64_t>(f)});
    Frame<GroundTruthAnnotation> frame;
    frame.frame_id = f;
    const int count = static_cast<int>(rng.uniform_int(
        config.min_aircraft_per_frame, config.max_aircraft_per_frame));
    for (int i = 0; i < count; ++i) {
      const int class_id = sample_class(rng, config.class_distribution);
      const double w = rng.uniform(config.min_box_side_px, config.max_box_side_px);
      const double h = rng.uniform(config.min_box_side_px, config.max_box_side_px);
      const double cx = rng.uniform(w / 2.0, config.image_width - w / 2.0);
      const double cy = rng.uniform(h / 2.0, config.image_height - h / 2.0);
      const double altitude = rng.uniform(config.min_aircraft_altitude_m,
                                          config.max_aircraft_altitude_m);
      BoundingBox box(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
      GroundTruthAnnotation gt{box, class_id, i,
                               localize(camera, box, altitude).position};
      frame.items.push_back(std::move(gt));
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

DetectionSet emulate_detector(const GroundTruthSet& ground_truth,
                              const DetectorProfile& profile,
                              std::uint64_t scenario_seed,
                              const ClassRegistry& registry) {
  if (profile.p_detect_small < 0.0 || profile.p_detect_small > 1.0 ||
      profile.p_detect_large < 0.0 || profile.p_detect_large > 1.0) {
    throw ValidationError("detection probabilities must be in [0, 1]");
  }
  if (profile.box_noise_sigma_px < 0.0 || profile.confidence_sigma < 0.0) {
    throw ValidationError("noise sigmas must be >= 0");
  }
  if (profile.false_positives_per_frame < 0.0) {
    throw ValidationError("false-positive rate must be >= 0");
  }

  const double w_img = ground_truth.image_width;
  const double h_img = ground_truth.image_height;
  const std::uint64_t model_hash = fnv1a64(profile.model_id);

  DetectionSet out;
  out.image_width = ground_truth.image_width;
  out.image_height = ground_truth.image_height;
  out.frames.reserve(ground_truth.frames.size());

  for (const auto& gt_frame : ground_truth.frames) {
    Rng rng(scenario_seed,
            {kDetectorStream, model_hash,
             static_cast<std::uint64_t>(gt_frame.frame_id)});
    Frame<Detection> frame;
    frame.frame_id = gt_frame.frame_id;
    int next_id = 0;

    for (const auto& gt : gt_frame.items) {
      const double p = area(gt.bbox) < profile.area_breakpoint_px2
                           ? profile.p_detect_small
                           : profile.p_detect_large;
      if (rng.uniform01() >= p) continue;

      double x1 = gt.bbox.x_min + rng.gaussian(0.0, profile.box_noise_sigma_px);
      double y1 = gt.bbox.y_min + rng.gaussian(0.0, profile.box_noise_sigma_px);
      double x2 = gt.bbox.x_max + rng.gaussian(0.0, profile.box_noise_sigma_px);
      double y2 = gt.bbox.y_max + rng.gaussian(0.0, profile.box_noise_sigma_px);
      const double conf_noise = rng.gaussian(0.0, profile.confidence_sigma);
      if (x1 > x2) std::swap(x1, x2);
      if (y1 > y2) std::swap(y1, y2);
      x1 = std::clamp(x1, 0.0, w_img);
      x2 = std::clamp(x2, 0.0, w_img);
      y1 = std::clamp(y1, 0.0, h_img);
      y2 = std::clamp(y2, 0.0, h_img);
      if (!(x1 < x2) || !(y1 < y2)) continue;  // clamped away: a miss

      BoundingBox noisy(x1, y1, x2, y2);
      const double confidence =
          std::clamp(iou(noisy, gt.bbox) + conf_noise, 0.0, 1.0);
      frame.items.push_back(
          Detection{noisy, gt.class_id, confidence, profile.model_id, next_id++});
    }

    const int n_fp = rng.poisson(profile.false_positives_per_frame);
    for (int i = 0; i < n_fp; ++i) {
      const double w = rng.uniform(profile.fp_min_side_px, profile.fp_max_side_px);
      const double h = rng.uniform(profile.fp_min_side_px, profile.fp_max_side_px);
      const double cx = rng.uniform(w / 2.0, w_img - w / 2.0);
      const double cy = rng.uniform(h / 2.0, h_img - h / 2.0);
      const int class_id =
          static_cast<int>(rng.uniform_int(0, registry.size() - 1));
      const double score = rng.uniform(0.05, 0.5);
      frame.items.push_back(Detection{
          BoundingBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0),
          class_id, score, profile.model_id, next_id++});
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace skyfuse
