// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skyfuse/errors.hpp"

namespace skyfuse {

/// Axis-aligned box in continuous image coordinates, origin top-left,
/// x right, y down. Corner form: strictly x_min < x_max, y_min < y_max.
/// The constructor rejects degenerate or non-finite boxes.
struct BoundingBox {
  double x_min;
  double y_min;
  double x_max;
  double y_max;

  BoundingBox(double x1, double y1, double x2, double y2)
      : x_min(x1), y_min(y1), x_max(x2), y_max(y2) {
    if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
        !std::isfinite(y2)) {
      throw ValidationError("bounding box has non-finite coordinates");
    }
    if (!(x_min < x_max)) {
      throw ValidationError("bounding box has zero or negative width");
    }
    if (!(y_min < y_max)) {
      throw ValidationError("bounding box has zero or negative height");
    }
  }

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  bool operator==(const BoundingBox&) const = default;
};

/// Geodetic position on the WGS84 ellipsoid. Longitude in (-180, 180].
struct GeoCoordinate {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
  double altitude = 0.0;   // meters above the ellipsoid

  bool operator==(const GeoCoordinate&) const = default;
};

/// One model's prediction for one frame.
struct Detection {
  BoundingBox bbox;
  int class_id = 0;
  double score = 0.0;  // confidence in [0, 1]
  std::string model_id;
  int det_id = 0;  // unique within (frame, model); canonical tie-breaker

  bool operator==(const Detection&) const = default;
};

/// One annotated aircraft in one frame. world_position is the true
/// geodetic position when the data source knows it (synthetic scenarios do).
struct GroundTruthAnnotation {
  BoundingBox bbox;
  int class_id = 0;
  int gt_id = 0;  // unique per frame
  std::optional<GeoCoordinate> world_position;

  bool operator==(const GroundTruthAnnotation&) const = default;
};

template <typename Item>
struct Frame {
  int frame_id = 0;
  std::vector<Item> items;

  bool operator==(const Frame&) const = default;
};

/// Detections or annotations grouped by frame. frame_id is strictly
/// increasing; every box has been clamped to the image rectangle at ingest.
template <typename Item>
struct FrameSet {
  int image_width = 0;
  int image_height = 0;
  std::vector<Frame<Item>> frames;

  bool operator==(const FrameSet&) const = default;
};

using DetectionSet = FrameSet<Detection>;
using GroundTruthSet = FrameSet<GroundTruthAnnotation>;

/// Dense class-id -> name registry. Ids run 0..size()-1.
class ClassRegistry {
 public:
  explicit ClassRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
      throw ValidationError("class registry must not be empty");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      for (std::size_t j = i + 1; j < names_.size(); ++j) {
        if (names_[i] == names_[j]) {
          throw ValidationError("duplicate class name: " + names_[i]);
        }
      }
    }
  }

  /// Shipped default categories for aerial intrusion monitoring.
  static ClassRegistry defaults() {
    return ClassRegistry({"drone", "eVTOL", "helicopter"});
  }

  bool contains(int class_id) const {
    return class_id >= 0 && static_cast<std::size_t>(class_id) < names_.size();
  }

  const std::string& name(int class_id) const {
    if (!contains(class_id)) {
      throw ValidationError("class id " + std::to_string(class_id) +
                            " not in registry");
    }
    return names_[static_cast<std::size_t>(class_id)];
  }

  int size() const { return static_cast<int>(names_.size()); }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace skyfuse
