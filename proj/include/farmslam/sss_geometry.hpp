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
 * @file sss_geometry.hpp
 * @brief Flat-bottom side-scan sonar geometry.
 *
 * A side-scan ping only observes targets broadside of the vehicle, so a
 * detection reduces to a horizontal range plus a bearing of +pi/2 (port)
 * or -pi/2 (starboard). Port is the +y body axis.
 */

#pragma once

#include <cmath>
#include <string_view>

#include "farmslam/core_types.hpp"

namespace farmslam
{

enum class Channel { port, starboard };
enum class TargetClass { buoy, rope };

inline std::string_view to_string(Channel c) { return c == Channel::port ? "port" : "stbd"; }
inline std::string_view to_string(TargetClass k) { return k == TargetClass::buoy ? "buoy" : "rope"; }

/// One target return extracted from a single ping.
struct Detection
{
  double t = 0.0;
  Channel channel = Channel::port;
  TargetClass klass = TargetClass::rope;
  double slant_range = 0.0;
  double vehicle_depth = 0.0;

  friend bool operator==(const Detection &, const Detection &) = default;
};

/// Known depths of each target class below the surface.
struct TargetDepthTable
{
  double buoy_depth = 0.0;
  double rope_depth = 1.5;

  double depth_of(TargetClass k) const { return k == TargetClass::buoy ? buoy_depth : rope_depth; }
};

/// Horizontal range of a target from its slant range and the two depths.
inline double project_slant_to_ground(double slant_range, double vehicle_depth, double target_depth)
{
  if (!(slant_range > 0.0)) {
    throw InvalidArgument("project_slant_to_ground: slant range must be positive");
  }
  const double dz = std::abs(vehicle_depth - target_depth);
  if (slant_range < dz) {
    throw InfeasibleGeometry("slant range shorter than the depth offset");
  }
  return std::sqrt(slant_range * slant_range - dz * dz);
}

inline double channel_bearing(Channel c) { return c == Channel::port ? kPi / 2.0 : -kPi / 2.0; }

inline RangeBearing detection_to_measurement(
  const Detection & det, const TargetDepthTable & depths, const Eigen::Matrix2d & noise)
{
  RangeBearing m;
  m.range = project_slant_to_ground(
    det.slant_range, det.vehicle_depth, depths.depth_of(det.klass));
  m.bearing = channel_bearing(det.channel);
  m.cov = noise;
  return m;
}

struct RangeBearingPrediction
{
  double range = 0.0;
  double bearing = 0.0;
};

/// Expected range and bearing of a landmark seen from @p pose.
inline RangeBearingPrediction predict_range_bearing(const Pose2 & pose, Point2 landmark)
{
  const double dx = landmark.x - pose.x;
  const double dy = landmark.y - pose.y;
  const double r = std::hypot(dx, dy);
  if (r < 1e-9) {
    throw DegenerateRange("landmark coincides with the vehicle position");
  }
  return {r, wrap_angle(std::atan2(dy, dx) - pose.theta)};
}

/// Inverse of predict_range_bearing; used to initialise new landmarks.
inline Point2 landmark_from_measurement(const Pose2 & pose, const RangeBearing & meas)
{
  if (!(meas.range > 0.0)) {
    throw InvalidArgument("landmark_from_measurement: range must be positive");
  }
  const double a = pose.theta + meas.bearing;
  return {pose.x + meas.range * std::cos(a), pose.y + meas.range * std::sin(a)};
}

}  // namespace farmslam
