// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "skyfuse/geometry.hpp"

using namespace skyfuse;

TEST_CASE("area of axis-aligned boxes") {
  CHECK(area(BoundingBox(0, 0, 10, 10)) == 100.0);
  CHECK(area(BoundingBox(0, 0, 1, 2)) == 2.0);
  CHECK(area(BoundingBox(1.5, 2.5, 4.0, 3.0)) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("box construction rejects invalid input") {
  CHECK_THROWS_AS(BoundingBox(5, 5, 5, 9), ValidationError);
  CHECK_THROWS_AS(BoundingBox(0, 0, 10, 0), ValidationError);
  CHECK_THROWS_AS(BoundingBox(3, 1, 2, 4), ValidationError);
  const double nan = std::nan("");
  CHECK_THROWS_AS(BoundingBox(0, 0, nan, 1), ValidationError);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(BoundingBox(0, 0, inf, 1), ValidationError);
}

TEST_CASE("iou basics") {
  CHECK(iou(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 10)) == 1.0);
  CHECK(iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0);
  // intersection 1, union 4 + 4 - 1 = 7
  CHECK(iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3)) ==
        doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  // boxes that only share an edge do not intersect
  CHECK(iou(BoundingBox(0, 0, 1, 1), BoundingBox(1, 0, 2, 1)) == 0.0);
}

TEST_CASE("iou properties over random boxes") {
  Rng rng(2024, {1});
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a = testing::random_box(rng);
    const BoundingBox b = testing::random_box(rng);
    const double ab = iou(a, b);
    CHECK(ab == iou(b, a));  // symmetry is exact: same min/max arithmetic
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(iou(a, a) == 1.0);

    // translation invariance
    const double tx = rng.uniform(-500.0, 500.0);
    const double ty = rng.uniform(-500.0, 500.0);
    const BoundingBox at(a.x_min + tx, a.y_min + ty, a.x_max + tx, a.y_max + ty);
    const BoundingBox bt(b.x_min + tx, b.y_min + ty, b.x_max + tx, b.y_max + ty);
    CHECK(iou(at, bt) == doctest::Approx(ab).epsilon(1e-12));

    // scale invariance
    const double s = rng.uniform(0.1, 10.0);
    const BoundingBox as(a.x_min * s, a.y_min * s, a.x_max * s, a.y_max * s);
    const BoundingBox bs(b.x_min * s, b.y_min * s, b.x_max * s, b.y_max * s);
    CHECK(iou(as, bs) == doctest::Approx(ab).epsilon(1e-9));
  }
}

TEST_CASE("clamp to image") {
  const BoundingBox clamped = clamp_to_image(BoundingBox(-5, -5, 20, 20), 10, 10);
  CHECK(clamped == BoundingBox(0, 0, 10, 10));
  // fully outside the image: degenerate after clamping
  CHECK_THROWS_AS(clamp_to_image(BoundingBox(20, 20, 30, 30), 10, 10),
                  ValidationError);
  // inside boxes are untouched
  const BoundingBox inside(1.5, 2.5, 4.0, 3.0);
  CHECK(clamp_to_image(inside, 10, 10) == inside);
}
