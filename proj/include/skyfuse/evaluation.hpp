// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "skyfuse/types.hpp"

namespace skyfuse {

/// Per-detection matching outcome. Unmatched detections carry iou 0 and
/// gt_id -1.
struct DetectionOutcome {
  int det_id = 0;
  int class_id = 0;
  double score = 0.0;
  bool matched = false;
  double iou = 0.0;
  int gt_id = -1;
};

/// Result of matching one frame's detections against its annotations.
/// Outcomes are listed in matching order (score desc, det_id asc); every
/// matched pair passed the IoU threshold, and no detection or annotation is
/// used twice.
struct FrameMatchResult {
  int frame_id = 0;
  double iou_threshold = 0.5;
  std::vector<DetectionOutcome> outcomes;
  std::vector<int> unmatched_gt_ids;
};

/// One point of a precision-recall sweep, at one distinct score threshold.
struct PRPoint {
  double score_threshold = 0.0;
  int tp = 0;  // cumulative over detections with score >= threshold
  int fp = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct ClassEval {
  int class_id = 0;
  int gt_count = 0;
  double ap = 0.0;
  std::vector<PRPoint> curve;
};

struct EvalReport {
  double iou_threshold = 0.5;
  double aggregate_ap = 0.0;            // mean over classes present in GT
  std::optional<double> mean_iou;       // absent when there are no TPs
  long tp = 0, fp = 0, fn = 0;
  std::vector<ClassEval> per_class;     // sorted by class_id
};

/// Greedy class-aware matching: detections in (score desc, det_id asc) order
/// each take the unmatched same-class annotation with the highest IoU at or
/// above the threshold (ties broken by lowest gt_id).
FrameMatchResult match_frame(std::vector<Detection> detections,
                             const std::vector<GroundTruthAnnotation>& annotations,
                             double iou_threshold, int frame_id = 0);

/// Precision-recall sweep for one class across all matched frames, one point
/// per distinct detection score (descending). total_gt is the number of
/// annotations of that class; zero raises NoGroundTruthError.
std::vector<PRPoint> pr_curve(const std::vector<FrameMatchResult>& matches,
                              int class_id, int total_gt);

/// All-points interpolated average precision of a PR curve:
/// sum over recall increments of the increment times the maximum precision at
/// recall >= that level. Empty curve -> 0.
double average_precision(const std::vector<PRPoint>& curve);

/// Mean IoU over every true-positive pair across all frames and classes;
/// absent when there are none.
std::optional<double> mean_iou(const std::vector<FrameMatchResult>& matches);

/// Full evaluation: per-frame matching (prediction frames must exist in the
/// ground truth; missing prediction frames count as empty), per-class PR/AP
/// for every class present in the annotations, aggregate AP, mean IoU and
/// TP/FP/FN counts. threads > 1 parallelizes the per-frame matching without
/// changing the result.
EvalReport evaluate(const DetectionSet& predictions,
                    const GroundTruthSet& ground_truth, double iou_threshold,
                    int threads = 1);

}  // namespace skyfuse
