// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "skyfuse/types.hpp"

namespace skyfuse {

/// Ensemble fusion parameters. Construct through make() so base weights are
/// normalized to sum 1 and the fallback model is checked against them.
struct FusionConfig {
  std::map<std::string, double> base_weights;  // normalized, sum == 1
  double cluster_iou_threshold = 0.55;         // box clustering
  double nms_iou_threshold = 0.5;              // final suppression
  double low_confidence_threshold = 0.3;       // fallback trigger
  double score_floor = 0.05;                   // fused detections below are dropped
  std::string fallback_model_id;               // box used verbatim on low-confidence clusters

  static FusionConfig make(std::map<std::string, double> base_weights,
                           std::string fallback_model_id,
                           double cluster_iou_threshold = 0.55,
                           double nms_iou_threshold = 0.5,
                           double low_confidence_threshold = 0.3,
                           double score_floor = 0.05);
};

struct ModelContribution {
  std::string model_id;
  int det_id = 0;

  bool operator==(const ModelContribution&) const = default;
};

/// One fused box with the cluster members that produced it.
struct FusedDetection {
  BoundingBox bbox;
  int class_id = 0;
  double score = 0.0;
  std::vector<ModelContribution> contributors;

  bool operator==(const FusedDetection&) const = default;
};

/// Greedy class-aware non-maximum suppression over one frame's detections.
/// Processing order is (score desc, det_id asc, model_id asc); survivors are
/// returned unmodified in that order, and any two same-class survivors
/// overlap below the threshold.
std::vector<Detection> nms(std::vector<Detection> detections,
                           double iou_threshold);

/// Base weights from per-model average precision: w_m = AP_m / sum AP.
/// Throws AllZeroApError when every AP is zero.
std::map<std::string, double> calibrate_weights(
    const std::map<std::string, double>& ap_per_model);

/// Fuse one frame's per-model detections into ensemble detections:
/// greedy same-class clustering at the cluster IoU threshold (at most one
/// member per model per cluster), confidence-weighted box averaging with
/// e_i = w_i * c_i, a score share that down-weights single-model clusters,
/// a fallback-box override when every member of a multi-model cluster is
/// below the low-confidence threshold, then score-floor filtering and NMS.
/// Output is sorted by (score desc, x_min asc).
std::vector<FusedDetection> fuse_frame(
    const std::map<std::string, std::vector<Detection>>& per_model_detections,
    const FusionConfig& config);

/// fuse_frame over the union of the sets' frame ids (frames a model did not
/// emit are treated as empty). Image dimensions must agree across sets.
/// threads > 1 fuses frames in parallel without changing the result.
std::vector<std::pair<int, std::vector<FusedDetection>>> fuse_sets(
    const std::map<std::string, DetectionSet>& per_model_sets,
    const FusionConfig& config, int threads = 1);

enum class Verdict { kMalicious, kUncertain };

struct IdentifiedDetection {
  FusedDetection detection;
  std::string class_name;
  Verdict verdict = Verdict::kUncertain;
};

/// Label fused detections: score >= decision_threshold is flagged malicious,
/// anything below is kept as uncertain for audit.
std::vector<IdentifiedDetection> identify(
    const std::vector<FusedDetection>& fused, const ClassRegistry& registry,
    double decision_threshold);

}  // namespace skyfuse
