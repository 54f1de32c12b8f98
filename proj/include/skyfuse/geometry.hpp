// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>

#include "skyfuse/types.hpp"

namespace skyfuse {

/// Box area in pixels^2. Continuous convention, no +1 pixel term.
inline double area(const BoundingBox& b) {
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

/// Intersection over union of two boxes. 0 when disjoint, 1 when identical.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) {
    return 0.0;
  }
  const double inter = ix * iy;
  return inter / (area(a) + area(b) - inter);
}

/// Clamp a box to the image rectangle [0,w] x [0,h]. Throws ValidationError
/// if the clamped box is degenerate (the box lies outside the image).
inline BoundingBox clamp_to_image(const BoundingBox& b, int image_width,
                                  int image_height) {
  const double w = static_cast<double>(image_width);
  const double h = static_cast<double>(image_height);
  return BoundingBox(std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h),
                     std::clamp(b.x_max, 0.0, w), std::clamp(b.y_max, 0.0, h));
}

}  // namespace skyfuse
