// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "skyfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "skyfuse/geometry.hpp"
#include "skyfuse/parallel.hpp"

namespace skyfuse {

namespace {

bool detection_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.det_id != b.det_id) return a.det_id < b.det_id;
  return a.model_id < b.model_id;
}

// Pool order for clustering: score desc, then model id, then det id.
bool pool_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.model_id != b.model_id) return a.model_id < b.model_id;
  return a.det_id < b.det_id;
}

// Total order for the fused-list NMS and the final output. Falls back to the
// first contributor so ties are broken the same way on every run.
bool fused_order(const FusedDetection& a, const FusedDetection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.bbox.x_min != b.bbox.x_min) return a.bbox.x_min < b.bbox.x_min;
  if (a.bbox.y_min != b.bbox.y_min) return a.bbox.y_min < b.bbox.y_min;
  if (a.bbox.x_max != b.bbox.x_max) return a.bbox.x_max < b.bbox.x_max;
  if (a.bbox.y_max != b.bbox.y_max) return a.bbox.y_max < b.bbox.y_max;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  const auto& ca = a.contributors.front();
  const auto& cb = b.contributors.front();
  if (ca.model_id != cb.model_id) return ca.model_id < cb.model_id;
  return ca.det_id < cb.det_id;
}

// A cluster under construction. The running fused box is the e-weighted
// coordinate average; while the total e mass is zero it degrades to the
// founding member's box.
struct Cluster {
  int class_id;
  std::vector<const Detection*> members;
  std::set<std::string> models;
  int positive_mass_members = 0;
  const Detection* sole_positive = nullptr;
  double sum_e = 0.0;
  double sum_x_min = 0.0, sum_y_min = 0.0, sum_x_max = 0.0, sum_y_max = 0.0;

  explicit Cluster(int cls) : class_id(cls) {}

  // The e-weighted coordinate mean. A cluster whose mass comes from a single
  // detection returns that box verbatim (the mean would only add rounding);
  // with no mass at all it degrades to the founding member's box.
  BoundingBox current_box() const {
    if (positive_mass_members == 1) {
      return sole_positive->bbox;
    }
    if (sum_e > 0.0) {
      return BoundingBox(sum_x_min / sum_e, sum_y_min / sum_e,
                         sum_x_max / sum_e, sum_y_max / sum_e);
    }
    return members.front()->bbox;
  }

  void add(const Detection& det, double weight) {
    members.push_back(&det);
    models.insert(det.model_id);
    const double e = weight * det.score;
    if (e > 0.0) {
      ++positive_mass_members;
      sole_positive = &det;
    }
    sum_e += e;
    sum_x_min += e * det.bbox.x_min;
    sum_y_min += e * det.bbox.y_min;
    sum_x_max += e * det.bbox.x_max;
    sum_y_max += e * det.bbox.y_max;
  }
};

}  // namespace

FusionConfig FusionConfig::make(std::map<std::string, double> base_weights,
                                std::string fallback_model_id,
                                double cluster_iou_threshold,
                                double nms_iou_threshold,
                                double low_confidence_threshold,
                                double score_floor) {
  if (base_weights.empty()) {
    throw ValidationError("fusion config needs at least one base weight");
  }
  double sum = 0.0;
  for (const auto& [model, w] : base_weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("base weight for model '" + model +
                            "' must be finite and non-negative");
    }
    sum += w;
  }
  if (sum <= 0.0) {
    throw ValidationError("base weights must not all be zero");
  }
  for (auto& [model, w] : base_weights) {
    w /= sum;
  }
  if (base_weights.find(fallback_model_id) == base_weights.end()) {
    throw ValidationError("fallback model '" + fallback_model_id +
                          "' has no base weight");
  }
  auto in_unit = [](double v, bool open_low) {
    return open_low ? (v > 0.0 && v <= 1.0) : (v >= 0.0 && v <= 1.0);
  };
  if (!in_unit(cluster_iou_threshold, true)) {
    throw ValidationError("cluster IoU threshold must be in (0, 1]");
  }
  if (!in_unit(nms_iou_threshold, true)) {
    throw ValidationError("NMS IoU threshold must be in (0, 1]");
  }
  if (!in_unit(low_confidence_threshold, false)) {
    throw ValidationError("low-confidence threshold must be in [0, 1]");
  }
  if (!in_unit(score_floor, false)) {
    throw ValidationError("score floor must be in [0, 1]");
  }

  FusionConfig cfg;
  cfg.base_weights = std::move(base_weights);
  cfg.cluster_iou_threshold = cluster_iou_threshold;
  cfg.nms_iou_threshold = nms_iou_threshold;
  cfg.low_confidence_threshold = low_confidence_threshold;
  cfg.score_floor = score_floor;
  cfg.fallback_model_id = std::move(fallback_model_id);
  return cfg;
}

std::vector<Detection> nms(std::vector<Detection> detections,
                           double iou_threshold) {
  std::sort(detections.begin(), detections.end(), detection_order);
  std::vector<Detection> kept;
  std::vector<bool> suppressed(detections.size(), false);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(detections[i]);
    for (std::size_t j = i + 1; j < detections.size(); ++j) {
      if (suppressed[j] || detections[j].class_id != detections[i].class_id) {
        continue;
      }
      if (iou(detections[i].bbox, detections[j].bbox) >= iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

std::map<std::string, double> calibrate_weights(
    const std::map<std::string, double>& ap_per_model) {
  if (ap_per_model.empty()) {
    throw ValidationError("no models to calibrate");
  }
  double sum = 0.0;
  for (const auto& [model, ap] : ap_per_model) {
    if (!std::isfinite(ap) || ap < 0.0 || ap > 1.0) {
      throw ValidationError("AP for model '" + model + "' must be in [0, 1]");
    }
    sum += ap;
  }
  if (sum <= 0.0) {
    throw AllZeroApError("every model AP is zero; no signal to weight by");
  }
  std::map<std::string, double> weights;
  for (const auto& [model, ap] : ap_per_model) {
    weights[model] = ap / sum;
  }
  return weights;
}

std::vector<FusedDetection> fuse_frame(
    const std::map<std::string, std::vector<Detection>>& per_model_detections,
    const FusionConfig& config) {
  // Pool and order canonically so the result is independent of input order.
  std::vector<Detection> pool;
  for (const auto& [model_id, dets] : per_model_detections) {
    for (const auto& det : dets) {
      if (config.base_weights.find(det.model_id) == config.base_weights.end()) {
        throw UnknownModelError("detection from model '" + det.model_id +
                                "' has no base weight");
      }
      pool.push_back(det);
    }
  }
  std::sort(pool.begin(), pool.end(), pool_order);

  std::vector<Cluster> clusters;
  for (const auto& det : pool) {
    const double weight = config.base_weights.at(det.model_id);
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      Cluster& cluster = clusters[c];
      if (cluster.class_id != det.class_id) continue;
      if (cluster.models.count(det.model_id) > 0) continue;  // one per model
      const double overlap = iou(cluster.current_box(), det.bbox);
      if (overlap >= config.cluster_iou_threshold && overlap > best_iou) {
        best = static_cast<int>(c);
        best_iou = overlap;
      }
    }
    if (best < 0) {
      clusters.emplace_back(det.class_id);
      clusters.back().add(det, weight);
    } else {
      clusters[static_cast<std::size_t>(best)].add(det, weight);
    }
  }

  double total_weight = 0.0;
  for (const auto& [model, w] : config.base_weights) total_weight += w;

  std::vector<FusedDetection> fused;
  for (const Cluster& cluster : clusters) {
    double cluster_weight = 0.0;
    for (const auto& model : cluster.models) {
      cluster_weight += config.base_weights.at(model);
    }

    // w-weighted mean of confidences, then scaled by the cluster's share of
    // the total model weight: single-model clusters lose their complement,
    // full agreement keeps the mean untouched.
    double score = 0.0;
    if (cluster_weight > 0.0) {
      score = (cluster.sum_e / cluster_weight) * (cluster_weight / total_weight);
    }

    BoundingBox box = cluster.current_box();

    // Low-confidence multi-model cluster: trust the fallback detector's
    // geometry verbatim, keep the fused score.
    if (cluster.models.size() >= 2) {
      bool all_low = true;
      for (const auto* member : cluster.members) {
        if (member->score >= config.low_confidence_threshold) {
          all_low = false;
          break;
        }
      }
      if (all_low) {
        for (const auto* member : cluster.members) {
          if (member->model_id == config.fallback_model_id) {
            box = member->bbox;
            break;
          }
        }
      }
    }

    if (score < config.score_floor) continue;

    FusedDetection det{box, cluster.class_id, score, {}};
    for (const auto* member : cluster.members) {
      det.contributors.push_back({member->model_id, member->det_id});
    }
    fused.push_back(std::move(det));
  }

  // Suppress overlapping fused boxes, then emit in canonical order.
  std::sort(fused.begin(), fused.end(), fused_order);
  std::vector<FusedDetection> kept;
  std::vector<bool> suppressed(fused.size(), false);
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(fused[i]);
    for (std::size_t j = i + 1; j < fused.size(); ++j) {
      if (suppressed[j] || fused[j].class_id != fused[i].class_id) continue;
      if (iou(fused[i].bbox, fused[j].bbox) >= config.nms_iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

std::vector<std::pair<int, std::vector<FusedDetection>>> fuse_sets(
    const std::map<std::string, DetectionSet>& per_model_sets,
    const FusionConfig& config, int threads) {
  if (per_model_sets.empty()) {
    throw ValidationError("no detection sets to fuse");
  }
  const int width = per_model_sets.begin()->second.image_width;
  const int height = per_model_sets.begin()->second.image_height;
  std::set<int> frame_id_set;
  for (const auto& [model, set] : per_model_sets) {
    if (set.image_width != width || set.image_height != height) {
      throw ValidationError("image dimensions differ between detection sets");
    }
    for (const auto& frame : set.frames) frame_id_set.insert(frame.frame_id);
  }
  const std::vector<int> frame_ids(frame_id_set.begin(), frame_id_set.end());

  std::map<std::string, std::map<int, const std::vector<Detection>*>> by_frame;
  for (const auto& [model, set] : per_model_sets) {
    for (const auto& frame : set.frames) {
      by_frame[model][frame.frame_id] = &frame.items;
    }
  }

  std::vector<std::pair<int, std::vector<FusedDetection>>> result(
      frame_ids.size());
  parallel_for_index(frame_ids.size(), threads, [&](std::size_t i) {
    std::map<std::string, std::vector<Detection>> per_model;
    for (const auto& [model, frames] : by_frame) {
      auto it = frames.find(frame_ids[i]);
      per_model[model] =
          it != frames.end() ? *it->second : std::vector<Detection>{};
    }
    result[i] = {frame_ids[i], fuse_frame(per_model, config)};
  });
  return result;
}

std::vector<IdentifiedDetection> identify(
    const std::vector<FusedDetection>& fused, const ClassRegistry& registry,
    double decision_threshold) {
  if (decision_threshold < 0.0 || decision_threshold > 1.0) {
    throw ValidationError("decision threshold must be in [0, 1]");
  }
  std::vector<IdentifiedDetection> out;
  out.reserve(fused.size());
  for (const auto& det : fused) {
    out.push_back(IdentifiedDetection{
        det, registry.name(det.class_id),
        det.score >= decision_threshold ? Verdict::kMalicious
                                        : Verdict::kUncertain});
  }
  return out;
}

}  // namespace skyfuse
