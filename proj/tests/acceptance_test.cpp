// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skyfuse/evaluation.hpp"
#include "skyfuse/fusion.hpp"
#include "skyfuse/geolocation.hpp"
#include "skyfuse/geometry.hpp"
#include "skyfuse/io.hpp"
#include "skyfuse/scenario.hpp"

using namespace skyfuse;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& info) {
    if (!detail.empty()) detail += "; ";
    detail += info;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

const ClassRegistry& registry() {
  static const ClassRegistry r = ClassRegistry::defaults();
  return r;
}

std::string fmt(double v) { return format_double(v); }

// --------------------------------------------------------------------------
// 1 + 2: seed-42 benchmark, ensemble AP dominance and mean-IoU sanity.
// --------------------------------------------------------------------------

struct BenchmarkResult {
  EvalReport fast, precise, ensemble;
  double seconds = 0.0;
};

BenchmarkResult run_benchmark() {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig cfg;  // seed 42, 200 frames, <=5 aircraft, defaults
  const auto truth = generate_scenario(cfg, registry());
  std::map<std::string, DetectionSet> sets;
  sets.emplace("fast", emulate_detector(truth, fast_profile(), cfg.seed, registry()));
  sets.emplace("precise",
               emulate_detector(truth, precise_profile(), cfg.seed, registry()));

  BenchmarkResult result;
  result.fast = evaluate(sets.at("fast"), truth, 0.5);
  result.precise = evaluate(sets.at("precise"), truth, 0.5);

  const auto weights = calibrate_weights(
      {{"fast", result.fast.aggregate_ap},
       {"precise", result.precise.aggregate_ap}});
  const FusionConfig fusion_cfg = FusionConfig::make(weights, "fast");
  const auto fused_frames = fuse_sets(sets, fusion_cfg);
  const DetectionSet fused = fused_to_detection_set(
      fused_frames, truth.image_width, truth.image_height);
  result.ensemble = evaluate(fused, truth, 0.5);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

Check criterion_ensemble_dominance(const BenchmarkResult& bench) {
  Check c;
  const double best_base =
      std::max(bench.fast.aggregate_ap, bench.precise.aggregate_ap);
  c.note("AP fast=" + fmt(bench.fast.aggregate_ap) +
         " precise=" + fmt(bench.precise.aggregate_ap) +
         " ensemble=" + fmt(bench.ensemble.aggregate_ap));
  c.expect(bench.ensemble.aggregate_ap >= best_base + 0.005,
           "margin below 0.005");
  c.expect(bench.seconds < 10.0,
           "runtime " + fmt(bench.seconds) + "s exceeds 10s");
  return c;
}

Check criterion_mean_iou(const BenchmarkResult& bench) {
  Check c;
  if (!bench.fast.mean_iou || !bench.precise.mean_iou ||
      !bench.ensemble.mean_iou) {
    c.fail("a mean IoU is absent");
    return c;
  }
  const double lo = std::min(*bench.fast.mean_iou, *bench.precise.mean_iou);
  c.note("mIoU fast=" + fmt(*bench.fast.mean_iou) +
         " precise=" + fmt(*bench.precise.mean_iou) +
         " ensemble=" + fmt(*bench.ensemble.mean_iou));
  c.expect(*bench.ensemble.mean_iou >= lo,
           "ensemble mean IoU below both base models");
  return c;
}

// --------------------------------------------------------------------------
// 3: NMS equals the brute-force greedy oracle.
// --------------------------------------------------------------------------

Check criterion_nms_oracle() {
  Check c;
  Rng rng(20250810, {100});
  int mismatches = 0;
  for (int frame = 0; frame < 500; ++frame) {
    const int n = static_cast<int>(rng.uniform_int(0, 50));
    const auto dets = testing::random_detections(rng, n, "m");
    const double tau = rng.uniform(0.2, 0.9);
    const auto ours = nms(dets, tau);
    const auto oracle = testing::brute_force_nms(dets, tau);
    if (ours.size() != oracle.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < ours.size(); ++i) {
      if (!(ours[i] == oracle[i])) {
        ++mismatches;
        break;
      }
    }
  }
  c.note("500 random frames up to 50 boxes");
  c.expect(mismatches == 0,
           std::to_string(mismatches) + " frames differ from the oracle");
  return c;
}

// --------------------------------------------------------------------------
// 4: AP equals the naive evaluator; hand case is exactly 5/6.
// --------------------------------------------------------------------------

Check criterion_ap_oracle() {
  Check c;
  Rng rng(20250810, {200});
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int n_frames = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<testing::EvalFrame> frames;
    std::vector<FrameMatchResult> matches;
    std::map<int, int> gt_counts;
    for (int f = 0; f < n_frames; ++f) {
      auto dets = testing::random_detections(
          rng, static_cast<int>(rng.uniform_int(0, 30)), "m", 3, 600.0, 600.0);
      auto gts = testing::random_annotations(
          rng, static_cast<int>(rng.uniform_int(0, 15)), 3, 600.0, 600.0);
      for (const auto& g : gts) ++gt_counts[g.class_id];
      matches.push_back(match_frame(dets, gts, 0.5, f));
      frames.emplace_back(std::move(dets), std::move(gts));
    }
    for (const auto& [class_id, count] : gt_counts) {
      const double ours = average_precision(pr_curve(matches, class_id, count));
      const double naive =
          testing::naive_average_precision(frames, class_id, 0.5);
      worst = std::max(worst, std::abs(ours - naive));
    }
  }
  c.note("worst |AP - oracle| = " + fmt(worst) + " over 200 instances");
  c.expect(worst <= 1e-12, "AP deviates from the naive evaluator");

  // hand case: 2 ground truths; detections 0.9 TP, 0.8 FP, 0.7 TP
  const BoundingBox g1(0, 0, 10, 10), g2(100, 100, 110, 110);
  const std::vector<GroundTruthAnnotation> gts{
      {g1, 0, 0, std::nullopt}, {g2, 0, 1, std::nullopt}};
  const std::vector<Detection> dets{
      {g1, 0, 0.9, "m", 0},
      {BoundingBox(50, 50, 60, 60), 0, 0.8, "m", 1},
      {g2, 0, 0.7, "m", 2}};
  const double hand =
      average_precision(pr_curve({match_frame(dets, gts, 0.5)}, 0, 2));
  c.expect(std::abs(hand - 5.0 / 6.0) <= 1e-12,
           "hand case AP " + fmt(hand) + " != 5/6");
  return c;
}

// --------------------------------------------------------------------------
// 5: weight calibration from the published AP pair.
// --------------------------------------------------------------------------

Check criterion_calibration() {
  Check c;
  const auto w = calibrate_weights({{"A", 0.81}, {"B", 0.83}});
  c.note("w(A)=" + fmt(w.at("A")) + " w(B)=" + fmt(w.at("B")));
  c.expect(std::abs(w.at("A") - 0.81 / 1.64) <= 1e-9, "w(A) off");
  c.expect(std::abs(w.at("B") - 0.83 / 1.64) <= 1e-9, "w(B) off");
  c.expect(std::abs(w.at("A") + w.at("B") - 1.0) <= 1e-12,
           "weights do not sum to 1");
  c.expect(w.at("B") > w.at("A"), "argmax not preserved");
  return c;
}

// --------------------------------------------------------------------------
// 6: fusion properties over 1000 seeded random frames.
// --------------------------------------------------------------------------

std::map<std::string, std::vector<Detection>> random_two_model_frame(Rng& rng) {
  std::map<std::string, std::vector<Detection>> per_model;
  const int shared = static_cast<int>(rng.uniform_int(0, 5));
  std::vector<BoundingBox> bases;
  // sides >= 30 so the corner jitter below can never invert a box
  for (int i = 0; i < shared; ++i) {
    bases.push_back(testing::random_box(rng, 1000.0, 1000.0, 30.0, 200.0));
  }
  for (const std::string model : {"a", "b"}) {
    auto& dets = per_model[model];
    int id = 0;
    for (const auto& base : bases) {
      if (rng.uniform01() < 0.8) {
        const double j = rng.uniform(0.0, 6.0);
        dets.push_back(Detection{
            BoundingBox(base.x_min + rng.uniform(-j, j),
                        base.y_min + rng.uniform(-j, j),
                        base.x_max + rng.uniform(-j, j),
                        base.y_max + rng.uniform(-j, j)),
            static_cast<int>(rng.uniform_int(0, 2)), rng.uniform(0.06, 1.0),
            model, id++});
      }
    }
    const int extras = static_cast<int>(rng.uniform_int(0, 3));
    for (int i = 0; i < extras; ++i) {
      dets.push_back(Detection{testing::random_box(rng),
                               static_cast<int>(rng.uniform_int(0, 2)),
                               rng.uniform(0.06, 1.0), model, id++});
    }
  }
  return per_model;
}

Check criterion_fusion_properties() {
  Check c;
  Rng rng(20250810, {300});
  int agreement_fail = 0, contain_fail = 0, scale_fail = 0, order_fail = 0;

  for (int frame = 0; frame < 1000; ++frame) {
    const double wa = rng.uniform(0.1, 0.9);
    const double wb = rng.uniform(0.1, 0.9);
    const auto cfg = FusionConfig::make({{"a", wa}, {"b", wb}}, "a");

    // agreement fixed point: both models emit the same set
    {
      std::vector<Detection> base = testing::random_detections(
          rng, static_cast<int>(rng.uniform_int(0, 8)), "a");
      for (auto& d : base) d.score = rng.uniform(0.06, 1.0);
      std::vector<Detection> mirrored = base;
      for (auto& d : mirrored) d.model_id = "b";
      const auto fused = fuse_frame({{"a", base}, {"b", mirrored}}, cfg);
      const auto reference = nms(base, cfg.nms_iou_threshold);
      if (fused.size() != reference.size()) {
        ++agreement_fail;
      } else {
        // compare as canonically sorted lists of (box, class, score)
        auto key = [](double x_min, double score, int cls) {
          return std::make_tuple(x_min, score, cls);
        };
        std::vector<std::tuple<double, double, int>> fk, rk;
        std::vector<const BoundingBox*> fb, rb;
        for (const auto& f : fused) fk.push_back(key(f.bbox.x_min, f.score, f.class_id));
        for (const auto& r : reference) rk.push_back(key(r.bbox.x_min, r.score, r.class_id));
        std::vector<std::size_t> fi(fused.size()), ri(reference.size());
        for (std::size_t i = 0; i < fused.size(); ++i) fi[i] = i;
        for (std::size_t i = 0; i < reference.size(); ++i) ri[i] = i;
        std::sort(fi.begin(), fi.end(), [&](auto a, auto b) { return fk[a] < fk[b]; });
        std::sort(ri.begin(), ri.end(), [&](auto a, auto b) { return rk[a] < rk[b]; });
        for (std::size_t i = 0; i < fused.size(); ++i) {
          const auto& f = fused[fi[i]];
          const auto& r = reference[ri[i]];
          const bool box_ok = std::abs(f.bbox.x_min - r.bbox.x_min) <= 1e-9 &&
                              std::abs(f.bbox.y_min - r.bbox.y_min) <= 1e-9 &&
                              std::abs(f.bbox.x_max - r.bbox.x_max) <= 1e-9 &&
                              std::abs(f.bbox.y_max - r.bbox.y_max) <= 1e-9;
          if (!box_ok || f.class_id != r.class_id ||
              std::abs(f.score - r.score) > 1e-12) {
            ++agreement_fail;
            break;
          }
        }
      }
    }

    // containment, scale invariance, order invariance on a generic frame
    auto per_model = random_two_model_frame(rng);
    const auto fused = fuse_frame(per_model, cfg);

    std::map<std::pair<std::string, int>, const Detection*> by_key;
    for (const auto& [model, dets] : per_model) {
      for (const auto& d : dets) by_key[{model, d.det_id}] = &d;
    }
    for (const auto& f : fused) {
      double lo[4] = {1e300, 1e300, 1e300, 1e300};
      double hi[4] = {-1e300, -1e300, -1e300, -1e300};
      for (const auto& contributor : f.contributors) {
        const auto* d = by_key.at({contributor.model_id, contributor.det_id});
        const double coords[4] = {d->bbox.x_min, d->bbox.y_min, d->bbox.x_max,
                                  d->bbox.y_max};
        for (int k = 0; k < 4; ++k) {
          lo[k] = std::min(lo[k], coords[k]);
          hi[k] = std::max(hi[k], coords[k]);
        }
      }
      const double fc[4] = {f.bbox.x_min, f.bbox.y_min, f.bbox.x_max,
                            f.bbox.y_max};
      for (int k = 0; k < 4; ++k) {
        if (fc[k] < lo[k] - 1e-9 || fc[k] > hi[k] + 1e-9) {
          ++contain_fail;
          break;
        }
      }
    }

    const double k = std::ldexp(1.0, static_cast<int>(rng.uniform_int(-8, 8)));
    const auto scaled_cfg =
        FusionConfig::make({{"a", wa * k}, {"b", wb * k}}, "a");
    if (!(fuse_frame(per_model, scaled_cfg) == fused)) ++scale_fail;

    for (auto& [model, dets] : per_model) {
      for (std::size_t i = dets.size(); i > 1; --i) {
        std::swap(dets[i - 1], dets[static_cast<std::size_t>(rng.uniform_int(
                                   0, static_cast<std::int64_t>(i) - 1))]);
      }
    }
    if (!(fuse_frame(per_model, cfg) == fused)) ++order_fail;
  }

  c.note("1000 frames");
  c.expect(agreement_fail == 0,
           std::to_string(agreement_fail) + " agreement failures");
  c.expect(contain_fail == 0,
           std::to_string(contain_fail) + " containment failures");
  c.expect(scale_fail == 0,
           std::to_string(scale_fail) + " weight-scaling failures");
  c.expect(order_fail == 0,
           std::to_string(order_fail) + " input-order failures");
  return c;
}

// --------------------------------------------------------------------------
// 7: geolocation reference cases, reprojection, ENU round trip.
// --------------------------------------------------------------------------

Check criterion_geolocation() {
  Check c;
  const CameraModel nadir =
      CameraModel::make(1000, 1000, 640, 480, 1280, 960,
                        GeoCoordinate{40.0, 116.0, 100.0}, 0.0, -90.0, 0.0);

  const auto below = localize(nadir, BoundingBox(630, 470, 650, 490), 0.0);
  c.expect(std::abs(below.position.latitude - 40.0) <= 1e-9 &&
               std::abs(below.position.longitude - 116.0) <= 1e-9,
           "nadir principal point misses the sub-camera point");

  const auto east = localize(nadir, BoundingBox(730, 470, 750, 490), 0.0);
  c.expect(std::abs(east.enu_offset.x - 10.0) <= 1e-6 &&
               std::abs(east.enu_offset.y) <= 1e-6,
           "100 px / fx=1000 / 100 m case is not a 10 m East offset");

  Rng rng(20250810, {400});
  int valid = 0;
  double worst_px = 0.0;
  int attempts = 0;
  while (valid < 1000 && attempts < 20000) {
    ++attempts;
    const CameraModel cam = CameraModel::make(
        rng.uniform(500.0, 2000.0), rng.uniform(500.0, 2000.0),
        rng.uniform(600.0, 680.0), rng.uniform(440.0, 520.0), 1280, 960,
        GeoCoordinate{rng.uniform(-60.0, 60.0), rng.uniform(-179.0, 179.0),
                      rng.uniform(50.0, 2000.0)},
        rng.uniform(0.0, 360.0), rng.uniform(-120.0, -30.0),
        rng.uniform(-20.0, 20.0));
    const double px = rng.uniform(40.0, 1240.0);
    const double py = rng.uniform(40.0, 920.0);
    const double target = rng.uniform(0.0, cam.position.altitude - 30.0);
    try {
      const auto result =
          localize(cam, BoundingBox(px - 4, py - 4, px + 4, py + 4), target);
      const auto pix = enu_to_pixel(cam, result.enu_offset);
      worst_px = std::max({worst_px, std::abs(pix[0] - px),
                           std::abs(pix[1] - py)});
      if (result.position.altitude != target) {
        c.fail("altitude not returned bit-for-bit");
      }
      ++valid;
    } catch (const Error&) {
      // ray missed the plane: not a valid configuration, draw again
    }
  }
  c.note("reprojection worst error " + fmt(worst_px) + " px over " +
         std::to_string(valid) + " configs");
  c.expect(valid == 1000, "could not draw 1000 valid configurations");
  c.expect(worst_px <= 1e-6, "reprojection error above 1e-6 px");

  double worst_m = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GeoCoordinate origin{rng.uniform(-60.0, 60.0),
                               rng.uniform(-179.0, 179.0),
                               rng.uniform(0.0, 2000.0)};
    const Vec3 enu{rng.uniform(-10000.0, 10000.0),
                   rng.uniform(-10000.0, 10000.0),
                   rng.uniform(-1000.0, 1000.0)};
    const Vec3 back = geodetic_to_enu(origin, enu_to_geodetic(origin, enu));
    worst_m = std::max({worst_m, std::abs(back.x - enu.x),
                        std::abs(back.y - enu.y), std::abs(back.z - enu.z)});
  }
  c.note("ENU round-trip worst error " + fmt(worst_m) + " m");
  c.expect(worst_m <= 1e-6, "ENU round trip above 1e-6 m");
  return c;
}

// --------------------------------------------------------------------------
// 8: byte-identical pipeline artifacts, serial and parallel.
// --------------------------------------------------------------------------

Check criterion_determinism() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "skyfuse_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const ScenarioConfig cfg;
  const auto truth = generate_scenario(cfg, registry());
  write_file((dir / "gt.json").string(), emit_frameset(truth));
  write_file((dir / "fast.json").string(),
             emit_frameset(emulate_detector(truth, fast_profile(), cfg.seed,
                                            registry())));
  write_file((dir / "precise.json").string(),
             emit_frameset(emulate_detector(truth, precise_profile(), cfg.seed,
                                            registry())));
  write_file((dir / "camera.json").string(), emit_camera(scenario_camera(cfg)));

  auto make_config = [&](const std::string& out, int threads) {
    PipelineConfig pipeline;
    pipeline.detection_files = {{"fast", (dir / "fast.json").string()},
                                {"precise", (dir / "precise.json").string()}};
    pipeline.ground_truth_file = (dir / "gt.json").string();
    pipeline.camera_file = (dir / "camera.json").string();
    pipeline.output_dir = (dir / out).string();
    pipeline.target_altitude_m = 150.0;
    pipeline.threads = threads;
    return pipeline;
  };

  std::ostringstream out1, out2, diag;
  const int s1 = run_pipeline(make_config("run1", 1), out1, diag);
  const int s2 = run_pipeline(make_config("run2", 4), out2, diag);
  c.expect(s1 == 0 && s2 == 0, "pipeline did not exit cleanly: " + diag.str());
  if (s1 == 0 && s2 == 0) {
    c.expect(out1.str() == out2.str(), "summary output differs");
    for (const char* name :
         {"fused_detections.json", "verdicts.json", "localizations.json",
          "eval_report.json", "pr_curve.csv"}) {
      const std::string a = read_file((dir / "run1" / name).string());
      const std::string b = read_file((dir / "run2" / name).string());
      if (a != b) c.fail(std::string(name) + " differs between runs");
    }
    c.note("5 artifacts byte-identical across 1 and 4 threads");
  }
  return c;
}

}  // namespace

int main() {
  const BenchmarkResult bench = run_benchmark();

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"ensemble AP dominates both base detectors (margin 0.005, <10s)",
       [&] { return criterion_ensemble_dominance(bench); }},
      {"ensemble mean IoU is at least the weaker base model's",
       [&] { return criterion_mean_iou(bench); }},
      {"NMS is set-identical to the brute-force greedy oracle",
       criterion_nms_oracle},
      {"average precision matches the naive evaluator within 1e-12",
       criterion_ap_oracle},
      {"AP-ratio weight calibration (0.81/0.83 pair)", criterion_calibration},
      {"fusion properties hold over 1000 seeded random frames",
       criterion_fusion_properties},
      {"geolocation reference cases, reprojection and ENU round trips",
       criterion_geolocation},
      {"pipeline artifacts are byte-identical, serial and parallel",
       criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (!result.pass) ++failures;
    std::printf("[%s] criterion %zu: %s%s%s\n", result.pass ? "PASS" : "FAIL",
                i + 1, criteria[i].first.c_str(),
                result.detail.empty() ? "" : " — ", result.detail.c_str());
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
