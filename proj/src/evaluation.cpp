// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "skyfuse/evaluation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "skyfuse/geometry.hpp"
#include "skyfuse/parallel.hpp"

namespace skyfuse {

FrameMatchResult match_frame(
    std::vector<Detection> detections,
    const std::vector<GroundTruthAnnotation>& annotations, double iou_threshold,
    int frame_id) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("matching IoU threshold must be in (0, 1]");
  }
  std::sort(detections.begin(), detections.end(),
            [](const Detection& a, const Detection& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.det_id < b.det_id;
            });

  FrameMatchResult result;
  result.frame_id = frame_id;
  result.iou_threshold = iou_threshold;
  std::vector<bool> gt_taken(annotations.size(), false);

  for (const Detection& det : detections) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < annotations.size(); ++g) {
      const auto& gt = annotations[g];
      if (gt_taken[g] || gt.class_id != det.class_id) continue;
      const double overlap = iou(det.bbox, gt.bbox);
      if (overlap < iou_threshold) continue;
      if (overlap > best_iou ||
          (overlap == best_iou && best >= 0 &&
           gt.gt_id < annotations[static_cast<std::size_t>(best)].gt_id)) {
        best = static_cast<int>(g);
        best_iou = overlap;
      }
    }
    DetectionOutcome outcome;
    outcome.det_id = det.det_id;
    outcome.class_id = det.class_id;
    outcome.score = det.score;
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = true;
      outcome.matched = true;
      outcome.iou = best_iou;
      outcome.gt_id = annotations[static_cast<std::size_t>(best)].gt_id;
    }
    result.outcomes.push_back(outcome);
  }

  for (std::size_t g = 0; g < annotations.size(); ++g) {
    if (!gt_taken[g]) result.unmatched_gt_ids.push_back(annotations[g].gt_id);
  }
  std::sort(result.unmatched_gt_ids.begin(), result.unmatched_gt_ids.end());
  return result;
}

std::vector<PRPoint> pr_curve(const std::vector<FrameMatchResult>& matches,
                              int class_id, int total_gt) {
  if (total_gt <= 0) {
    throw NoGroundTruthError("class " + std::to_string(class_id) +
                             " has no ground-truth annotations");
  }
  std::vector<std::pair<double, bool>> scored;  // (score, is_tp)
  for (const auto& frame : matches) {
    for (const auto& outcome : frame.outcomes) {
      if (outcome.class_id == class_id) {
        scored.emplace_back(outcome.score, outcome.matched);
      }
    }
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<PRPoint> curve;
  int tp = 0, fp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second) {
      ++tp;
    } else {
      ++fp;
    }
    // One point per distinct score, after all detections at that score.
    if (i + 1 < scored.size() && scored[i + 1].first == scored[i].first) {
      continue;
    }
    PRPoint point;
    point.score_threshold = scored[i].first;
    point.tp = tp;
    point.fp = fp;
    point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    point.recall = static_cast<double>(tp) / static_cast<double>(total_gt);
    curve.push_back(point);
  }
  return curve;
}

double average_precision(const std::vector<PRPoint>& curve) {
  if (curve.empty()) return 0.0;
  // Running maximum of precision over the curve suffix; recall is
  // non-decreasing, so the suffix at the first occurrence of a recall level
  // covers exactly the points with recall >= that level.
  std::vector<double> max_prec(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    max_prec[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].recall > prev_recall) {
      ap += (curve[i].recall - prev_recall) * max_prec[i];
      prev_recall = curve[i].recall;
    }
  }
  return ap;
}

std::optional<double> mean_iou(const std::vector<FrameMatchResult>& matches) {
  double sum = 0.0;
  long count = 0;
  for (const auto& frame : matches) {
    for (const auto& outcome : frame.outcomes) {
      if (outcome.matched) {
        sum += outcome.iou;
        ++count;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

EvalReport evaluate(const DetectionSet& predictions,
                    const GroundTruthSet& ground_truth, double iou_threshold,
                    int threads) {
  std::map<int, const Frame<Detection>*> pred_by_id;
  for (const auto& frame : predictions.frames) {
    pred_by_id[frame.frame_id] = &frame;
  }
  std::set<int> gt_ids;
  for (const auto& frame : ground_truth.frames) gt_ids.insert(frame.frame_id);
  for (const auto& [frame_id, frame] : pred_by_id) {
    if (gt_ids.count(frame_id) == 0) {
      throw FrameMismatchError("prediction frame " + std::to_string(frame_id) +
                               " has no ground-truth counterpart");
    }
  }

  std::vector<FrameMatchResult> matches(ground_truth.frames.size());
  parallel_for_index(
      ground_truth.frames.size(), threads, [&](std::size_t i) {
        const auto& gt_frame = ground_truth.frames[i];
        auto it = pred_by_id.find(gt_frame.frame_id);
        std::vector<Detection> dets =
            it != pred_by_id.end() ? it->second->items : std::vector<Detection>{};
        matches[i] = match_frame(std::move(dets), gt_frame.items, iou_threshold,
                                 gt_frame.frame_id);
      });

  std::map<int, int> gt_counts;
  for (const auto& frame : ground_truth.frames) {
    for (const auto& gt : frame.items) ++gt_counts[gt.class_id];
  }

  EvalReport report;
  report.iou_threshold = iou_threshold;
  double ap_sum = 0.0;
  for (const auto& [class_id, count] : gt_counts) {
    ClassEval ce;
    ce.class_id = class_id;
    ce.gt_count = count;
    ce.curve = pr_curve(matches, class_id, count);
    ce.ap = average_precision(ce.curve);
    ap_sum += ce.ap;
    report.per_class.push_back(std::move(ce));
  }
  if (!report.per_class.empty()) {
    report.aggregate_ap = ap_sum / static_cast<double>(report.per_class.size());
  }
  report.mean_iou = mean_iou(matches);
  for (const auto& frame : matches) {
    for (const auto& outcome : frame.outcomes) {
      if (outcome.matched) {
        ++report.tp;
      } else {
        ++report.fp;
      }
    }
    report.fn += static_cast<long>(frame.unmatched_gt_ids.size());
  }
  return report;
}

}  // namespace skyfuse
