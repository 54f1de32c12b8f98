// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skyfuse/geolocation.hpp"
#include "skyfuse/types.hpp"

namespace skyfuse {

/// Parameters of the seeded synthetic benchmark: per-frame aircraft counts,
/// box sizes, class mix and the aircraft altitude band used to assign true
/// world positions under the scenario camera.
struct ScenarioConfig {
  int n_frames = 200;
  int image_width = 1280;
  int image_height = 960;
  int min_aircraft_per_frame = 1;
  int max_aircraft_per_frame = 5;
  double min_box_side_px = 16.0;
  double max_box_side_px = 120.0;
  std::vector<double> class_distribution = {0.5, 0.3, 0.2};  // sums to 1
  double min_aircraft_altitude_m = 60.0;
  double max_aircraft_altitude_m = 240.0;
  std::uint64_t seed = 42;
};

/// Behaviour of one emulated detector: area-dependent detection probability,
/// per-corner localization noise, Poisson false positives and a confidence
/// model that tracks the true IoU. Each profile draws from its own RNG
/// stream, split by (scenario seed, model id, frame id).
struct DetectorProfile {
  std::string model_id;
  double p_detect_small = 0.9;     // for GT area < area_breakpoint_px2
  double p_detect_large = 0.95;
  double area_breakpoint_px2 = 2304.0;  // 48 x 48
  double box_noise_sigma_px = 2.0;      // per corner coordinate
  double false_positives_per_frame = 0.3;  // Poisson mean
  double confidence_sigma = 0.1;  // confidence = clamp(iou + N(0, sigma), 0, 1)
  double fp_min_side_px = 16.0;
  double fp_max_side_px = 120.0;
};

/// Fast one-stage-style profile: sees small objects, loose boxes, more
/// false alarms.
DetectorProfile fast_profile();

/// Precise two-stage-style profile: misses small objects, tight boxes, few
/// false alarms.
DetectorProfile precise_profile();

/// The fixed nadir observation camera the scenario is defined under.
CameraModel scenario_camera(const ScenarioConfig& config);

/// Deterministically generate ground-truth frames for the scenario. Every
/// annotation carries the aircraft's true world position, consistent with
/// its box under the scenario camera.
GroundTruthSet generate_scenario(const ScenarioConfig& config,
                                 const ClassRegistry& registry);

/// Deterministically emulate one detector over the ground truth.
DetectionSet emulate_detector(const GroundTruthSet& ground_truth,
                              const DetectorProfile& profile,
                              std::uint64_t scenario_seed,
                              const ClassRegistry& registry);

}  // namespace skyfuse
