// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "skyfuse/types.hpp"

namespace skyfuse {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;

  bool operator==(const Vec3&) const = default;
};

/// Pinhole camera with a geodetic pose.
///
/// Intrinsics are in pixels; the image frame has x right and y down.
/// Orientation is yaw/pitch/roll degrees applied in that (ZYX) order in the
/// local East-North-Up frame anchored at the camera: yaw 0 faces North with
/// positive yaw turning toward East, pitch -90 looks straight down (nadir),
/// roll turns about the optical axis. At zero orientation the camera is
/// level, facing North, with image x mapping East and image y mapping down.
struct CameraModel {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int width = 0, height = 0;
  GeoCoordinate position;             // camera center
  double yaw_deg = 0.0;               // 0 = North, positive toward East
  double pitch_deg = 0.0;             // -90 = nadir
  double roll_deg = 0.0;

  static CameraModel make(double fx, double fy, double cx, double cy,
                          int width, int height, GeoCoordinate position,
                          double yaw_deg, double pitch_deg, double roll_deg);
};

/// Where a bounding box projects onto the target-altitude plane: the exact
/// intersection in the camera-anchored ENU frame plus its geodetic
/// equivalent. position.altitude always equals the requested target altitude.
struct LocalizationResult {
  GeoCoordinate position;
  Vec3 enu_offset;   // intersection point, meters from the camera
  double range_m = 0.0;  // distance camera -> intersection
};

/// Unit ray direction in the camera's ENU frame for an image point.
Vec3 pixel_ray(const CameraModel& camera, double px, double py);

/// Project the box center onto the horizontal plane at target_altitude_m and
/// convert to geodetic coordinates. Throws NoIntersectionError for rays
/// parallel to the plane and BehindCameraError when the intersection
/// parameter is not positive.
LocalizationResult localize(const CameraModel& camera, const BoundingBox& box,
                            double target_altitude_m);

/// Inverse of pixel_ray composed with the pinhole projection: image
/// coordinates of an ENU point. Throws BehindCameraError when the point is
/// on or behind the image plane.
std::array<double, 2> enu_to_pixel(const CameraModel& camera, const Vec3& enu);

/// Exact WGS84 conversions between geodetic coordinates and the local
/// East-North-Up frame at origin. Valid within 50 km of the origin
/// (OutOfRangeError beyond); the pair are mutual inverses.
Vec3 geodetic_to_enu(const GeoCoordinate& origin, const GeoCoordinate& point);
GeoCoordinate enu_to_geodetic(const GeoCoordinate& origin, const Vec3& enu);

/// WGS84 geodetic <-> Earth-centered Earth-fixed.
Vec3 geodetic_to_ecef(const GeoCoordinate& geo);
GeoCoordinate ecef_to_geodetic(const Vec3& ecef);

/// Wrap a longitude into (-180, 180].
double normalize_longitude(double lon_deg);

}  // namespace skyfuse
