// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "skyfuse/evaluation.hpp"
#include "skyfuse/fusion.hpp"
#include "skyfuse/geolocation.hpp"
#include "skyfuse/types.hpp"

namespace skyfuse {

// ---------------------------------------------------------------------------
// Frameset files.
//
// {"image_width": int, "image_height": int,
//  "frames": [{"frame_id": int,
//              "items": [{"bbox": [x1, y1, x2, y2], "class_id": int,
//                         "score": float?, "det_id": int,
//                         "world_position": [lat, lon, alt]?}]}]}
//
// "score" present marks a detection file, absent a ground-truth file;
// "world_position" is only meaningful for ground truth. Boxes are clamped to
// the image rectangle at ingest; any invariant breach raises ValidationError,
// any shape problem SchemaError. Emission writes keys in the order above with
// full-precision floats, so parse(emit(x)) == x and emission is byte-stable.
// ---------------------------------------------------------------------------

DetectionSet parse_detection_frameset(const std::string& text,
                                      const std::string& model_id,
                                      const ClassRegistry& registry);
GroundTruthSet parse_ground_truth_frameset(const std::string& text,
                                           const ClassRegistry& registry);
std::string emit_frameset(const DetectionSet& set);
std::string emit_frameset(const GroundTruthSet& set);

// Camera file: exactly {fx, fy, cx, cy, width, height, latitude, longitude,
// altitude, yaw, pitch, roll}; degrees and meters.
CameraModel parse_camera(const std::string& text);
std::string emit_camera(const CameraModel& camera);

// Weights file: {"weights": {model: w, ...}, "ap": {model: ap, ...}?}.
std::map<std::string, double> parse_weights(const std::string& text);
std::string emit_weights(const std::map<std::string, double>& weights,
                         const std::map<std::string, double>& ap_per_model);

// Evaluation report and plot-ready PR curve
// (CSV columns: class,threshold,tp,fp,precision,recall).
std::string emit_eval_report(const EvalReport& report,
                             const ClassRegistry& registry);
std::string emit_pr_csv(const EvalReport& report);

// Identification verdicts and per-detection geolocations, by frame.
std::string emit_verdicts(
    const std::vector<std::pair<int, std::vector<IdentifiedDetection>>>& frames,
    double decision_threshold);
std::string emit_localizations(
    const std::vector<std::pair<int, std::vector<LocalizationResult>>>& frames,
    double target_altitude_m);

/// Repackage per-frame fused detections as a detection frameset under the
/// "ensemble" model id, det_id numbered in fused order.
DetectionSet fused_to_detection_set(
    const std::vector<std::pair<int, std::vector<FusedDetection>>>& frames,
    int image_width, int image_height);

/// Shortest decimal form of a double that parses back to the same value.
std::string format_double(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------------------
// Whole pipeline: fuse -> identify -> localize -> evaluate, emitting
// fused_detections.json, verdicts.json, localizations.json, eval_report.json
// and pr_curve.csv into output_dir, plus one AP/mIoU summary line per model
// and for the ensemble on `out`.
// ---------------------------------------------------------------------------

struct PipelineConfig {
  std::map<std::string, std::string> detection_files;  // model id -> path
  std::string ground_truth_file;
  std::string camera_file;
  std::string weights_file;                     // optional
  std::map<std::string, double> manual_weights; // optional, overrides file
  std::string fallback_model_id;                // empty: first model id
  double cluster_iou_threshold = 0.55;
  double nms_iou_threshold = 0.5;
  double low_confidence_threshold = 0.3;
  double score_floor = 0.05;
  double match_iou_threshold = 0.5;
  double decision_threshold = 0.5;
  double target_altitude_m = 0.0;
  std::string output_dir;
  int threads = 1;
  std::vector<std::string> class_names;  // empty: default registry
};

/// Returns the process exit status: 0 success, 1 validation/semantic error,
/// 2 I/O error. Diagnostics go to `diag`.
int run_pipeline(const PipelineConfig& config, std::ostream& out,
                 std::ostream& diag);

}  // namespace skyfuse
