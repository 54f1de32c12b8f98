// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "skyfuse/geolocation.hpp"

#include <cmath>

namespace skyfuse {

namespace {

// WGS84 ellipsoid.
constexpr double kSemiMajorM = 6378137.0;
constexpr double kFlattening = 1.0 / 298.257223563;
constexpr double kEccSq = kFlattening * (2.0 - kFlattening);
constexpr double kTangentPlaneRadiusM = 50000.0;
constexpr double kPi = 3.141592653589793238462643383279502884;

double deg2rad(double deg) { return deg * (kPi / 180.0); }
double rad2deg(double rad) { return rad * (180.0 / kPi); }

struct Mat3 {
  // Row-major.
  double m[3][3];

  Vec3 apply(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  // Rotation matrices are orthonormal, so the transpose inverts them.
  Vec3 apply_transposed(const Vec3& v) const {
    return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
      }
    }
    return r;
  }
};

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}
Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}
Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

// Camera frame (x right, y down, z optical) to aircraft body frame
// (x forward, y right, z down): cam x -> body y, cam y -> body z,
// cam z -> body x.
constexpr Mat3 kCamToBody = {{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}};

// NED (x North, y East, z Down) to ENU.
constexpr Mat3 kNedToEnu = {{{0, 1, 0}, {1, 0, 0}, {0, 0, -1}}};

// Full rotation taking camera-frame vectors into the local ENU frame.
// Yaw/pitch/roll follow the aerospace ZYX convention in NED, which gives
// yaw 0 = North, positive yaw toward East, pitch -90 = nadir.
Mat3 camera_to_enu_rotation(const CameraModel& cam) {
  const Mat3 ned_from_body = rot_z(deg2rad(cam.yaw_deg)) *
                             rot_y(deg2rad(cam.pitch_deg)) *
                             rot_x(deg2rad(cam.roll_deg));
  return kNedToEnu * ned_from_body * kCamToBody;
}

// ENU axes at a geodetic origin, expressed in ECEF (rows e, n, u).
Mat3 enu_axes(const GeoCoordinate& origin) {
  const double lat = deg2rad(origin.latitude);
  const double lon = deg2rad(origin.longitude);
  const double sin_lat = std::sin(lat), cos_lat = std::cos(lat);
  const double sin_lon = std::sin(lon), cos_lon = std::cos(lon);
  return {{{-sin_lon, cos_lon, 0},
           {-sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat},
           {cos_lat * cos_lon, cos_lat * sin_lon, sin_lat}}};
}

}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

double normalize_longitude(double lon_deg) {
  double lon = std::fmod(lon_deg, 360.0);
  if (lon > 180.0) lon -= 360.0;
  if (lon <= -180.0) lon += 360.0;
  return lon;
}

CameraModel CameraModel::make(double fx, double fy, double cx, double cy,
                              int width, int height, GeoCoordinate position,
                              double yaw_deg, double pitch_deg,
                              double roll_deg) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ValidationError("focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("image dimensions must be positive");
  }
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw ValidationError("principal point must lie inside the image");
  }
  if (std::abs(position.latitude) > 90.0) {
    throw ValidationError("latitude must be in [-90, 90]");
  }
  if (pitch_deg < -180.0 || pitch_deg > 180.0) {
    throw ValidationError("pitch must be in [-180, 180]");
  }
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.position = position;
  cam.position.longitude = normalize_longitude(position.longitude);
  cam.yaw_deg = yaw_deg;
  cam.pitch_deg = pitch_deg;
  cam.roll_deg = roll_deg;
  return cam;
}

Vec3 geodetic_to_ecef(const GeoCoordinate& geo) {
  const double lat = deg2rad(geo.latitude);
  const double lon = deg2rad(geo.longitude);
  const double sin_lat = std::sin(lat), cos_lat = std::cos(lat);
  const double n = kSemiMajorM / std::sqrt(1.0 - kEccSq * sin_lat * sin_lat);
  return {(n + geo.altitude) * cos_lat * std::cos(lon),
          (n + geo.altitude) * cos_lat * std::sin(lon),
          (n * (1.0 - kEccSq) + geo.altitude) * sin_lat};
}

GeoCoordinate ecef_to_geodetic(const Vec3& ecef) {
  const double p = std::hypot(ecef.x, ecef.y);
  const double lon = std::atan2(ecef.y, ecef.x);

  // Fixed-point iteration on latitude; converges far below 1e-12 m for any
  // point within the low-altitude envelope.
  double lat = std::atan2(ecef.z, p * (1.0 - kEccSq));
  double alt = 0.0;
  for (int iter = 0; iter < 12; ++iter) {
    const double sin_lat = std::sin(lat);
    const double n = kSemiMajorM / std::sqrt(1.0 - kEccSq * sin_lat * sin_lat);
    if (p > 1.0) {
      alt = p / std::cos(lat) - n;
    } else {
      alt = std::abs(ecef.z) - n * (1.0 - kEccSq);  // near the poles
    }
    const double next = std::atan2(ecef.z, p * (1.0 - kEccSq * n / (n + alt)));
    if (std::abs(next - lat) < 1e-15) {
      lat = next;
      break;
    }
    lat = next;
  }
  const double sin_lat = std::sin(lat);
  const double n = kSemiMajorM / std::sqrt(1.0 - kEccSq * sin_lat * sin_lat);
  if (p > 1.0) {
    alt = p / std::cos(lat) - n;
  } else {
    alt = std::abs(ecef.z) - n * (1.0 - kEccSq);
  }
  return {rad2deg(lat), normalize_longitude(rad2deg(lon)), alt};
}

Vec3 geodetic_to_enu(const GeoCoordinate& origin, const GeoCoordinate& point) {
  const Vec3 delta = geodetic_to_ecef(point) - geodetic_to_ecef(origin);
  const Vec3 enu = enu_axes(origin).apply(delta);
  if (std::abs(enu.x) > kTangentPlaneRadiusM ||
      std::abs(enu.y) > kTangentPlaneRadiusM ||
      std::abs(enu.z) > kTangentPlaneRadiusM) {
    throw OutOfRangeError("point beyond the 50 km tangent-plane radius");
  }
  return enu;
}

GeoCoordinate enu_to_geodetic(const GeoCoordinate& origin, const Vec3& enu) {
  if (std::abs(enu.x) > kTangentPlaneRadiusM ||
      std::abs(enu.y) > kTangentPlaneRadiusM ||
      std::abs(enu.z) > kTangentPlaneRadiusM) {
    throw OutOfRangeError("ENU offset beyond the 50 km tangent-plane radius");
  }
  const Vec3 ecef =
      geodetic_to_ecef(origin) + enu_axes(origin).apply_transposed(enu);
  return ecef_to_geodetic(ecef);
}

Vec3 pixel_ray(const CameraModel& camera, double px, double py) {
  if (px < 0.0 || px > camera.width || py < 0.0 || py > camera.height) {
    throw ValidationError("pixel lies outside the image rectangle");
  }
  const Vec3 cam_dir{(px - camera.cx) / camera.fx, (py - camera.cy) / camera.fy,
                     1.0};
  const Vec3 enu_dir = camera_to_enu_rotation(camera).apply(cam_dir);
  const double n = enu_dir.norm();
  return enu_dir * (1.0 / n);
}

LocalizationResult localize(const CameraModel& camera, const BoundingBox& box,
                            double target_altitude_m) {
  const Vec3 dir = pixel_ray(camera, box.center_x(), box.center_y());
  const double plane_u = target_altitude_m - camera.position.altitude;
  if (dir.z == 0.0) {
    throw NoIntersectionError("pixel ray is parallel to the target plane");
  }
  const double t = plane_u / dir.z;
  if (t <= 0.0) {
    throw BehindCameraError("target plane is behind the camera");
  }
  LocalizationResult result;
  result.enu_offset = dir * t;
  result.range_m = t;  // dir is unit length
  result.position = enu_to_geodetic(camera.position, result.enu_offset);
  result.position.altitude = target_altitude_m;
  return result;
}

std::array<double, 2> enu_to_pixel(const CameraModel& camera, const Vec3& enu) {
  const Vec3 cam_vec = camera_to_enu_rotation(camera).apply_transposed(enu);
  if (cam_vec.z <= 0.0) {
    throw BehindCameraError("point is behind the image plane");
  }
  return {camera.fx * cam_vec.x / cam_vec.z + camera.cx,
          camera.fy * cam_vec.y / cam_vec.z + camera.cy};
}

}  // namespace skyfuse
