// Copyright (c) 2026 The farmslam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file core_types.hpp
 * @brief Planar poses, points and Gaussian measurement types shared by all modules.
 *
 * Conventions: x is East, y is North, headings are CCW from +x and always
 * live in (-pi, pi]. Bearings are measured from the vehicle heading.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "farmslam/errors.hpp"

namespace farmslam
{

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into the half-open interval (-pi, pi].
inline double wrap_angle(double a)
{
  if (!std::isfinite(a)) {
    throw InvalidArgument("wrap_angle: non-finite angle");
  }
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Point2
{
  double x = 0.0;
  double y = 0.0;

  Eigen::Vector2d vec() const { return {x, y}; }
  static Point2 from(const Eigen::Vector2d & v) { return {v.x(), v.y()}; }

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2 &, const Point2 &) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Planar AUV state. The heading is wrapped on construction.
struct Pose2
{
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_)
  : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  static Pose2 identity() { return {}; }
  static Pose2 from(const Eigen::Vector3d & v) { return {v.x(), v.y(), v.z()}; }

  Eigen::Vector3d vec() const { return {x, y, theta}; }
  Point2 translation() const { return {x, y}; }

  /// Rotation taking body-frame vectors to the world frame.
  Eigen::Matrix2d rotation() const
  {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
  }

  friend bool operator==(const Pose2 &, const Pose2 &) = default;
};

/// a * b: applies b expressed in the frame of a.
inline Pose2 compose(const Pose2 & a, const Pose2 & b)
{
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta};
}

inline Pose2 inverse(const Pose2 & p)
{
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return {-c * p.x - s * p.y, s * p.x - c * p.y, -p.theta};
}

/// Relative pose of b seen from a, so that compose(a, between(a, b)) == b.
inline Pose2 between(const Pose2 & a, const Pose2 & b)
{
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return {c * dx + s * dy, -s * dx + c * dy, b.theta - a.theta};
}

/// Maps a body-frame point to the world frame.
inline Point2 transform_from(const Pose2 & pose, Point2 body)
{
  return Point2::from(pose.translation().vec() + pose.rotation() * body.vec());
}

/// Maps a world-frame point into the body frame of @p pose.
inline Point2 transform_to(const Pose2 & pose, Point2 world)
{
  return Point2::from(pose.rotation().transpose() * (world - pose.translation()).vec());
}

template<typename Derived>
bool is_spd(const Eigen::MatrixBase<Derived> & m)
{
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) {
    return false;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!(m - m.transpose()).isZero(1e-12 * scale)) {
    return false;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m.template cast<double>());
  return llt.info() == Eigen::Success;
}

struct Gaussian2
{
  Point2 mean;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Body-frame relative motion between consecutive pose samples.
struct OdometryDelta
{
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();

  Pose2 as_pose() const { return {dx, dy, dtheta}; }
};

struct RangeBearing
{
  double range = 0.0;
  double bearing = 0.0;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

}  // namespace farmslam
