// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0
//
// skyfuse command-line tool: synthetic benchmark generation, detection
// fusion, identification, geolocation and evaluation.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skyfuse/evaluation.hpp"
#include "skyfuse/fusion.hpp"
#include "skyfuse/geolocation.hpp"
#include "skyfuse/io.hpp"
#include "skyfuse/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace skyfuse;

std::pair<std::string, std::string> split_pair(const std::string& spec,
                                               const char* what) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ValidationError(std::string(what) + " must look like NAME=VALUE: " +
                          spec);
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

std::map<std::string, std::string> parse_file_specs(
    const std::vector<std::string>& specs) {
  std::map<std::string, std::string> files;
  for (const auto& spec : specs) {
    auto [model, path] = split_pair(spec, "--det");
    if (!files.emplace(model, path).second) {
      throw ValidationError("duplicate model id: " + model);
    }
  }
  return files;
}

std::map<std::string, double> parse_weight_specs(
    const std::vector<std::string>& specs) {
  std::map<std::string, double> weights;
  for (const auto& spec : specs) {
    auto [model, value] = split_pair(spec, "--weight");
    weights[model] = std::stod(value);
  }
  return weights;
}

ClassRegistry make_registry(const std::vector<std::string>& names) {
  return names.empty() ? ClassRegistry::defaults() : ClassRegistry(names);
}

/// Uniform exit-code mapping: 0 ok, 1 validation/semantic, 2 I/O.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct SimulateOptions {
  std::string out_dir;
  ScenarioConfig scenario;
  std::vector<std::string> class_names;
};

int run_simulate(const SimulateOptions& opt) {
  return guarded([&] {
    const ClassRegistry registry = make_registry(opt.class_names);
    ScenarioConfig cfg = opt.scenario;
    if (static_cast<int>(cfg.class_distribution.size()) != registry.size()) {
      throw ValidationError(
          "class distribution size must match the class registry");
    }
    const GroundTruthSet truth = generate_scenario(cfg, registry);
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    write_file((dir / "ground_truth.json").string(), emit_frameset(truth));
    for (const DetectorProfile& profile : {fast_profile(), precise_profile()}) {
      const DetectionSet dets =
          emulate_detector(truth, profile, cfg.seed, registry);
      write_file((dir / ("detections_" + profile.model_id + ".json")).string(),
                 emit_frameset(dets));
    }
    write_file((dir / "camera.json").string(), emit_camera(scenario_camera(cfg)));
    std::cout << "wrote benchmark (seed " << cfg.seed << ", " << cfg.n_frames
              << " frames) to " << opt.out_dir << "\n";
  });
}

struct CalibrateOptions {
  std::string gt_file;
  std::vector<std::string> det_specs;
  std::vector<std::string> class_names;
  double match_iou = 0.5;
  int threads = 1;
  std::string out_file;
};

int run_calibrate(const CalibrateOptions& opt) {
  return guarded([&] {
    const ClassRegistry registry = make_registry(opt.class_names);
    const GroundTruthSet gt =
        parse_ground_truth_frameset(read_file(opt.gt_file), registry);
    std::map<std::string, double> ap;
    for (const auto& [model, path] : parse_file_specs(opt.det_specs)) {
      const DetectionSet dets =
          parse_detection_frameset(read_file(path), model, registry);
      ap[model] = evaluate(dets, gt, opt.match_iou, opt.threads).aggregate_ap;
    }
    const auto weights = calibrate_weights(ap);
    write_file(opt.out_file, emit_weights(weights, ap));
    for (const auto& [model, w] : weights) {
      std::cout << model << ": AP=" << format_double(ap.at(model))
                << " weight=" << format_double(w) << "\n";
    }
  });
}

struct FuseOptions {
  std::vector<std::string> det_specs;
  std::vector<std::string> weight_specs;
  std::string weights_file;
  std::string fallback_model;
  std::vector<std::string> class_names;
  double cluster_iou = 0.55;
  double nms_iou = 0.5;
  double low_confidence = 0.3;
  double score_floor = 0.05;
  int threads = 1;
  std::string out_file;
};

int run_fuse(const FuseOptions& opt) {
  return guarded([&] {
    const ClassRegistry registry = make_registry(opt.class_names);
    std::map<std::string, DetectionSet> sets;
    for (const auto& [model, path] : parse_file_specs(opt.det_specs)) {
      sets.emplace(model, parse_detection_frameset(read_file(path), model, registry));
    }
    if (sets.empty()) {
      throw ValidationError("at least one --det is required");
    }
    std::map<std::string, double> weights = parse_weight_specs(opt.weight_specs);
    if (weights.empty() && !opt.weights_file.empty()) {
      weights = parse_weights(read_file(opt.weights_file));
    }
    if (weights.empty()) {
      throw ValidationError("provide --weights FILE or --weight MODEL=W");
    }
    const std::string fallback =
        opt.fallback_model.empty() ? sets.begin()->first : opt.fallback_model;
    const FusionConfig cfg =
        FusionConfig::make(weights, fallback, opt.cluster_iou, opt.nms_iou,
                           opt.low_confidence, opt.score_floor);
    const auto fused = fuse_sets(sets, cfg, opt.threads);
    const DetectionSet fused_set = fused_to_detection_set(
        fused, sets.begin()->second.image_width, sets.begin()->second.image_height);
    write_file(opt.out_file, emit_frameset(fused_set));
  });
}

struct EvalOptions {
  std::string gt_file;
  std::string det_spec;
  std::vector<std::string> class_names;
  double match_iou = 0.5;
  int threads = 1;
  std::string report_file;
  std::string pr_csv_file;
};

int run_eval(const EvalOptions& opt) {
  return guarded([&] {
    const ClassRegistry registry = make_registry(opt.class_names);
    const GroundTruthSet gt =
        parse_ground_truth_frameset(read_file(opt.gt_file), registry);
    auto [model, path] = split_pair(opt.det_spec, "--det");
    const DetectionSet dets =
        parse_detection_frameset(read_file(path), model, registry);
    const EvalReport report = evaluate(dets, gt, opt.match_iou, opt.threads);
    if (!opt.report_file.empty()) {
      write_file(opt.report_file, emit_eval_report(report, registry));
    }
    if (!opt.pr_csv_file.empty()) {
      write_file(opt.pr_csv_file, emit_pr_csv(report));
    }
    std::cout << "model " << model << ": AP=" << format_double(report.aggregate_ap)
              << " mIoU="
              << (report.mean_iou ? format_double(*report.mean_iou) : "n/a")
              << " tp=" << report.tp << " fp=" << report.fp
              << " fn=" << report.fn << "\n";
  });
}

struct LocalizeOptions {
  std::string camera_file;
  std::string detections_file;
  std::string model_id = "detections";
  std::vector<std::string> class_names;
  double target_altitude = 0.0;
  std::string out_file;
};

int run_localize(const LocalizeOptions& opt) {
  return guarded([&] {
    const ClassRegistry registry = make_registry(opt.class_names);
    const CameraModel camera = parse_camera(read_file(opt.camera_file));
    const DetectionSet dets = parse_detection_frameset(
        read_file(opt.detections_file), opt.model_id, registry);
    std::vector<std::pair<int, std::vector<LocalizationResult>>> frames;
    for (const auto& frame : dets.frames) {
      std::vector<LocalizationResult> locations;
      locations.reserve(frame.items.size());
      for (const auto& det : frame.items) {
        locations.push_back(localize(camera, det.bbox, opt.target_altitude));
      }
      frames.emplace_back(frame.frame_id, std::move(locations));
    }
    write_file(opt.out_file, emit_localizations(frames, opt.target_altitude));
  });
}

struct PipelineOptions {
  PipelineConfig config;
  std::vector<std::string> det_specs;
  std::vector<std::string> weight_specs;
};

int run_pipeline_cmd(PipelineOptions& opt) {
  try {
    opt.config.detection_files = parse_file_specs(opt.det_specs);
    opt.config.manual_weights = parse_weight_specs(opt.weight_specs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return run_pipeline(opt.config, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "skyfuse: detection fusion, geolocation and evaluation for "
      "low-altitude airspace monitoring"};
  app.require_subcommand(1);
  int exit_code = 0;

  std::vector<std::string> class_names;
  app.add_option("--classes", class_names,
                 "class names, id order (default: drone,eVTOL,helicopter)")
      ->delimiter(',');

  // simulate
  SimulateOptions sim;
  auto* simulate = app.add_subcommand(
      "simulate", "generate the seeded synthetic benchmark and detector files");
  simulate->add_option("--out-dir", sim.out_dir, "output directory")->required();
  simulate->add_option("--seed", sim.scenario.seed, "RNG seed")
      ->capture_default_str();
  simulate->add_option("--frames", sim.scenario.n_frames, "number of frames")
      ->capture_default_str();
  simulate->add_option("--width", sim.scenario.image_width, "image width, px")
      ->capture_default_str();
  simulate->add_option("--height", sim.scenario.image_height, "image height, px")
      ->capture_default_str();
  simulate
      ->add_option("--min-aircraft", sim.scenario.min_aircraft_per_frame,
                   "min aircraft per frame")
      ->capture_default_str();
  simulate
      ->add_option("--max-aircraft", sim.scenario.max_aircraft_per_frame,
                   "max aircraft per frame")
      ->capture_default_str();
  simulate
      ->add_option("--min-box", sim.scenario.min_box_side_px,
                   "min box side, px")
      ->capture_default_str();
  simulate
      ->add_option("--max-box", sim.scenario.max_box_side_px,
                   "max box side, px")
      ->capture_default_str();
  simulate
      ->add_option("--class-weights", sim.scenario.class_distribution,
                   "class sampling probabilities (sum 1)")
      ->delimiter(',');
  simulate->callback([&] {
    sim.class_names = class_names;
    exit_code = run_simulate(sim);
  });

  // calibrate
  CalibrateOptions cal;
  auto* calibrate = app.add_subcommand(
      "calibrate", "evaluate each model and derive AP-ratio fusion weights");
  calibrate->add_option("--gt", cal.gt_file, "ground-truth frameset JSON")
      ->required();
  calibrate
      ->add_option("--det", cal.det_specs,
                   "detection file as MODEL=PATH (repeatable)")
      ->required();
  calibrate->add_option("--match-iou", cal.match_iou, "matching IoU threshold")
      ->capture_default_str();
  calibrate->add_option("--threads", cal.threads, "worker threads")
      ->capture_default_str();
  calibrate->add_option("--out", cal.out_file, "weights JSON output")
      ->required();
  calibrate->callback([&] {
    cal.class_names = class_names;
    exit_code = run_calibrate(cal);
  });

  // fuse
  FuseOptions fuse;
  auto* fuse_cmd =
      app.add_subcommand("fuse", "fuse per-model detections into ensemble output");
  fuse_cmd
      ->add_option("--det", fuse.det_specs,
                   "detection file as MODEL=PATH (repeatable)")
      ->required();
  fuse_cmd->add_option("--weights", fuse.weights_file,
                       "weights JSON from 'calibrate'");
  fuse_cmd->add_option("--weight", fuse.weight_specs,
                       "manual weight as MODEL=W (repeatable)");
  fuse_cmd->add_option("--fallback-model", fuse.fallback_model,
                       "model whose box is used verbatim on low-confidence "
                       "clusters (default: first model id)");
  fuse_cmd->add_option("--cluster-iou", fuse.cluster_iou,
                       "IoU threshold for clustering boxes")
      ->capture_default_str();
  fuse_cmd->add_option("--nms-iou", fuse.nms_iou, "NMS IoU threshold")
      ->capture_default_str();
  fuse_cmd
      ->add_option("--low-confidence", fuse.low_confidence,
                   "confidence below which a cluster counts as low-confidence")
      ->capture_default_str();
  fuse_cmd
      ->add_option("--score-floor", fuse.score_floor,
                   "drop fused detections scoring below this")
      ->capture_default_str();
  fuse_cmd->add_option("--threads", fuse.threads, "worker threads")
      ->capture_default_str();
  fuse_cmd->add_option("--out", fuse.out_file, "fused detections JSON output")
      ->required();
  fuse_cmd->callback([&] {
    fuse.class_names = class_names;
    exit_code = run_fuse(fuse);
  });

  // eval
  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand(
      "eval", "evaluate one detection file against ground truth");
  eval_cmd->add_option("--gt", eval.gt_file, "ground-truth frameset JSON")
      ->required();
  eval_cmd->add_option("--det", eval.det_spec, "detection file as MODEL=PATH")
      ->required();
  eval_cmd->add_option("--match-iou", eval.match_iou, "matching IoU threshold")
      ->capture_default_str();
  eval_cmd->add_option("--threads", eval.threads, "worker threads")
      ->capture_default_str();
  eval_cmd->add_option("--report", eval.report_file, "evaluation report JSON");
  eval_cmd->add_option("--pr-csv", eval.pr_csv_file,
                       "PR curve CSV (class,threshold,tp,fp,precision,recall)");
  eval_cmd->callback([&] {
    eval.class_names = class_names;
    exit_code = run_eval(eval);
  });

  // localize
  LocalizeOptions loc;
  auto* localize_cmd = app.add_subcommand(
      "localize", "project detections to geographic coordinates");
  localize_cmd->add_option("--camera", loc.camera_file, "camera JSON")->required();
  localize_cmd
      ->add_option("--detections", loc.detections_file,
                   "detections frameset JSON (e.g. fused output)")
      ->required();
  localize_cmd
      ->add_option("--target-altitude", loc.target_altitude,
                   "altitude of the target plane, m")
      ->capture_default_str();
  localize_cmd->add_option("--out", loc.out_file, "localizations JSON output")
      ->required();
  localize_cmd->callback([&] {
    loc.class_names = class_names;
    exit_code = run_localize(loc);
  });

  // pipeline
  PipelineOptions pipe;
  auto* pipeline_cmd = app.add_subcommand(
      "pipeline", "full run: calibrate, fuse, identify, localize, evaluate");
  pipeline_cmd->add_option("--gt", pipe.config.ground_truth_file,
                           "ground-truth frameset JSON")
      ->required();
  pipeline_cmd
      ->add_option("--det", pipe.det_specs,
                   "detection file as MODEL=PATH (repeatable)")
      ->required();
  pipeline_cmd->add_option("--camera", pipe.config.camera_file, "camera JSON")
      ->required();
  pipeline_cmd->add_option("--out-dir", pipe.config.output_dir,
                           "artifact output directory")
      ->required();
  pipeline_cmd->add_option("--weights", pipe.config.weights_file,
                           "weights JSON (default: calibrate from the inputs)");
  pipeline_cmd->add_option("--weight", pipe.weight_specs,
                           "manual weight as MODEL=W (repeatable)");
  pipeline_cmd->add_option("--fallback-model", pipe.config.fallback_model_id,
                           "fallback model id (default: first model id)");
  pipeline_cmd
      ->add_option("--cluster-iou", pipe.config.cluster_iou_threshold,
                   "IoU threshold for clustering boxes")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--nms-iou", pipe.config.nms_iou_threshold,
                   "NMS IoU threshold")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--low-confidence", pipe.config.low_confidence_threshold,
                   "confidence below which a cluster counts as low-confidence")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--score-floor", pipe.config.score_floor,
                   "drop fused detections scoring below this")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--match-iou", pipe.config.match_iou_threshold,
                   "matching IoU threshold for evaluation")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--decision-threshold", pipe.config.decision_threshold,
                   "fused score at or above which a detection is malicious")
      ->capture_default_str();
  pipeline_cmd
      ->add_option("--target-altitude", pipe.config.target_altitude_m,
                   "altitude of the localization target plane, m")
      ->capture_default_str();
  pipeline_cmd->add_option("--threads", pipe.config.threads, "worker threads")
      ->capture_default_str();
  pipeline_cmd->callback([&] {
    pipe.config.class_names = class_names;
    exit_code = run_pipeline_cmd(pipe);
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
