// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "skyfuse/evaluation.hpp"
#include "skyfuse/geometry.hpp"
#include "skyfuse/io.hpp"
#include "skyfuse/scenario.hpp"

using namespace skyfuse;

namespace {

const ClassRegistry& registry() {
  static const ClassRegistry r = ClassRegistry::defaults();
  return r;
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

// Regression pins for the seed-42 default benchmark, computed once with the
// naive reference evaluator and frozen. See REGRESSION_PINS.
constexpr double kPinnedFastAp = 0.94600490441557283;
constexpr double kPinnedPreciseAp = 0.8163917473005492;

}  // namespace

TEST_CASE("generation is deterministic for a fixed seed") {
  const auto a = generate_scenario(default_config(), registry());
  const auto b = generate_scenario(default_config(), registry());
  CHECK(a == b);
  CHECK(emit_frameset(a) == emit_frameset(b));

  ScenarioConfig other = default_config();
  other.seed = 43;
  CHECK(emit_frameset(generate_scenario(other, registry())) != emit_frameset(a));
}

TEST_CASE("zero frames yields an empty set") {
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 0;
  const auto set = generate_scenario(cfg, registry());
  CHECK(set.frames.empty());
  CHECK(set.image_width == cfg.image_width);
}

TEST_CASE("frame contents do not depend on the total frame count") {
  ScenarioConfig small = default_config();
  small.n_frames = 1;
  const auto one = generate_scenario(small, registry());
  const auto full = generate_scenario(default_config(), registry());
  REQUIRE(!full.frames.empty());
  CHECK(one.frames[0] == full.frames[0]);
}

TEST_CASE("generated annotations satisfy the domain invariants") {
  const auto truth = generate_scenario(default_config(), registry());
  REQUIRE(truth.frames.size() == 200);
  int last_frame = -1;
  int total = 0;
  for (const auto& frame : truth.frames) {
    CHECK(frame.frame_id > last_frame);
    last_frame = frame.frame_id;
    CHECK(frame.items.size() >= 1);
    CHECK(frame.items.size() <= 5);
    total += static_cast<int>(frame.items.size());
    for (const auto& gt : frame.items) {
      CHECK(gt.bbox.x_min >= 0.0);
      CHECK(gt.bbox.y_min >= 0.0);
      CHECK(gt.bbox.x_max <= truth.image_width);
      CHECK(gt.bbox.y_max <= truth.image_height);
      CHECK(registry().contains(gt.class_id));
      REQUIRE(gt.world_position.has_value());
      CHECK(std::abs(gt.world_position->latitude) <= 90.0);
    }
  }
  CHECK(total > 200);
}

TEST_CASE("world positions are consistent with the scenario camera") {
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 20;
  const auto truth = generate_scenario(cfg, registry());
  const CameraModel cam = scenario_camera(cfg);
  for (const auto& frame : truth.frames) {
    for (const auto& gt : frame.items) {
      const auto relocated =
          localize(cam, gt.bbox, gt.world_position->altitude);
      CHECK(std::abs(relocated.position.latitude - gt.world_position->latitude) <
            1e-12);
      CHECK(std::abs(relocated.position.longitude -
                     gt.world_position->longitude) < 1e-12);
    }
  }
}

TEST_CASE("noiseless oracle detector reproduces the ground truth") {
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 30;
  const auto truth = generate_scenario(cfg, registry());
  DetectorProfile perfect;
  perfect.model_id = "oracle";
  perfect.p_detect_small = 1.0;
  perfect.p_detect_large = 1.0;
  perfect.box_noise_sigma_px = 0.0;
  perfect.false_positives_per_frame = 0.0;
  perfect.confidence_sigma = 0.0;
  const auto dets = emulate_detector(truth, perfect, cfg.seed, registry());
  REQUIRE(dets.frames.size() == truth.frames.size());
  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    REQUIRE(dets.frames[f].items.size() == truth.frames[f].items.size());
    for (std::size_t i = 0; i < truth.frames[f].items.size(); ++i) {
      CHECK(dets.frames[f].items[i].bbox == truth.frames[f].items[i].bbox);
      CHECK(dets.frames[f].items[i].score == 1.0);
      CHECK(dets.frames[f].items[i].class_id ==
            truth.frames[f].items[i].class_id);
    }
  }
  CHECK(evaluate(dets, truth, 0.5).aggregate_ap == 1.0);
}

TEST_CASE("blind detector produces nothing") {
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 10;
  const auto truth = generate_scenario(cfg, registry());
  DetectorProfile blind;
  blind.model_id = "blind";
  blind.p_detect_small = 0.0;
  blind.p_detect_large = 0.0;
  blind.false_positives_per_frame = 0.0;
  const auto dets = emulate_detector(truth, blind, cfg.seed, registry());
  for (const auto& frame : dets.frames) CHECK(frame.items.empty());
  CHECK(evaluate(dets, truth, 0.5).aggregate_ap == 0.0);
}

TEST_CASE("emulated detections are deterministic and valid") {
  const auto truth = generate_scenario(default_config(), registry());
  const auto a = emulate_detector(truth, fast_profile(), 42, registry());
  const auto b = emulate_detector(truth, fast_profile(), 42, registry());
  CHECK(a == b);
  const auto other_seed = emulate_detector(truth, fast_profile(), 7, registry());
  CHECK(!(a == other_seed));
  // different models draw from different streams
  const auto precise = emulate_detector(truth, precise_profile(), 42, registry());
  CHECK(!(a == precise));

  for (const auto& frame : a.frames) {
    for (const auto& det : frame.items) {
      CHECK(det.score >= 0.0);
      CHECK(det.score <= 1.0);
      CHECK(det.bbox.x_min >= 0.0);
      CHECK(det.bbox.x_max <= truth.image_width);
      CHECK(registry().contains(det.class_id));
    }
  }
}

TEST_CASE("TP confidence correlates with IoU") {
  // conf_sigma at the property bound (0.1); enough frames for >= 1000 TPs
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 500;
  const auto truth = generate_scenario(cfg, registry());
  DetectorProfile profile = fast_profile();
  profile.confidence_sigma = 0.1;
  const auto dets = emulate_detector(truth, profile, cfg.seed, registry());

  std::vector<double> ious, confs;
  for (std::size_t f = 0; f < truth.frames.size(); ++f) {
    const auto match =
        match_frame(dets.frames[f].items, truth.frames[f].items, 0.5);
    for (const auto& outcome : match.outcomes) {
      if (outcome.matched) {
        ious.push_back(outcome.iou);
        confs.push_back(outcome.score);
      }
    }
  }
  REQUIRE(ious.size() >= 1000);
  double mi = 0, mc = 0;
  for (std::size_t i = 0; i < ious.size(); ++i) {
    mi += ious[i];
    mc += confs[i];
  }
  mi /= static_cast<double>(ious.size());
  mc /= static_cast<double>(ious.size());
  double cov = 0, vi = 0, vc = 0;
  for (std::size_t i = 0; i < ious.size(); ++i) {
    cov += (ious[i] - mi) * (confs[i] - mc);
    vi += (ious[i] - mi) * (ious[i] - mi);
    vc += (confs[i] - mc) * (confs[i] - mc);
  }
  const double pearson = cov / std::sqrt(vi * vc);
  CHECK(pearson > 0.5);
}

TEST_CASE("REGRESSION_PINS: seed-42 default per-model AP") {
  const auto truth = generate_scenario(default_config(), registry());
  const auto as_frames = [&](const DetectionSet& dets) {
    std::vector<testing::EvalFrame> out;
    for (std::size_t f = 0; f < truth.frames.size(); ++f) {
      out.emplace_back(dets.frames[f].items, truth.frames[f].items);
    }
    return out;
  };

  const auto fast = emulate_detector(truth, fast_profile(), 42, registry());
  const auto precise = emulate_detector(truth, precise_profile(), 42, registry());

  const double fast_naive = testing::naive_aggregate_ap(as_frames(fast), 0.5);
  const double precise_naive =
      testing::naive_aggregate_ap(as_frames(precise), 0.5);
  CHECK(fast_naive == doctest::Approx(kPinnedFastAp).epsilon(1e-9));
  CHECK(precise_naive == doctest::Approx(kPinnedPreciseAp).epsilon(1e-9));

  // the production evaluator agrees with the reference route
  CHECK(evaluate(fast, truth, 0.5).aggregate_ap ==
        doctest::Approx(fast_naive).epsilon(1e-12));
  CHECK(evaluate(precise, truth, 0.5).aggregate_ap ==
        doctest::Approx(precise_naive).epsilon(1e-12));
}

TEST_CASE("golden fixture: frame 0 of the seed-42 scenario") {
  ScenarioConfig cfg = default_config();
  cfg.n_frames = 1;
  const auto truth = generate_scenario(cfg, registry());
  const std::string emitted = emit_frameset(truth);
  const std::string golden =
      read_file(std::string(SKYFUSE_TEST_DATA_DIR) + "/scenario_seed42_frame0.json");
  CHECK(emitted == golden);
  // and it parses back to the same value
  CHECK(parse_ground_truth_frameset(golden, registry()) == truth);
}

TEST_CASE("config validation") {
  ScenarioConfig cfg = default_config();
  cfg.class_distribution = {0.5, 0.5};  // wrong arity for the registry
  CHECK_THROWS_AS(generate_scenario(cfg, registry()), ValidationError);
  cfg = default_config();
  cfg.class_distribution = {0.5, 0.3, 0.1};
  CHECK_THROWS_AS(generate_scenario(cfg, registry()), ValidationError);
  cfg = default_config();
  cfg.min_aircraft_per_frame = 6;
  CHECK_THROWS_AS(generate_scenario(cfg, registry()), ValidationError);
  cfg = default_config();
  cfg.max_box_side_px = 5000.0;
  CHECK_THROWS_AS(generate_scenario(cfg, registry()), ValidationError);
}
