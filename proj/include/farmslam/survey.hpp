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
 * @file survey.hpp
 * @brief Time-ordered survey stream: farm header, odometry and detections.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "farmslam/association.hpp"
#include "farmslam/core_types.hpp"
#include "farmslam/motion_model.hpp"
#include "farmslam/sss_geometry.hpp"

namespace farmslam
{

/// Relative motion from the previous pose sample to the one at time t.
struct OdometryEvent
{
  double t = 0.0;
  OdometryDelta delta;

  friend bool operator==(const OdometryEvent & a, const OdometryEvent & b)
  {
    return a.t == b.t && a.delta.dx == b.delta.dx && a.delta.dy == b.delta.dy &&
           a.delta.dtheta == b.delta.dtheta && a.delta.cov == b.delta.cov;
  }
};

using SurveyEvent = std::variant<OdometryEvent, Detection>;

inline double event_time(const SurveyEvent & e)
{
  return std::visit([](const auto & x) { return x.t; }, e);
}

/// Events are non-decreasing in time; at equal times odometry comes first,
/// so a detection attaches to the pose sampled at or before it.
struct SurveyDataset
{
  FarmModel farm;
  Pose2 initial_pose;
  double start_time = 0.0;
  std::vector<SurveyEvent> events;
  std::optional<std::vector<DrState>> ground_truth;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::size_t count_odometry() const
  {
    std::size_t n = 0;
    for (const auto & e : events) {
      n += std::holds_alternative<OdometryEvent>(e) ? 1 : 0;
    }
    return n;
  }

  std::size_t count_detections(std::optional<TargetClass> klass = std::nullopt) const
  {
    std::size_t n = 0;
    for (const auto & e : events) {
      if (const auto * d = std::get_if<Detection>(&e)) {
        n += (!klass || d->klass == *klass) ? 1 : 0;
      }
    }
    return n;
  }

  std::vector<OdometryDelta> odometry() const
  {
    std::vector<OdometryDelta> out;
    for (const auto & e : events) {
      if (const auto * o = std::get_if<OdometryEvent>(&e)) {
        out.push_back(o->delta);
      }
    }
    return out;
  }

  /// Throws DataError unless events are time ordered with odometry first at ties.
  void validate() const
  {
    farm.validate();
    double last_t = start_time;
    bool last_was_det = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double t = event_time(events[i]);
      const bool is_det = std::holds_alternative<Detection>(events[i]);
      if (!std::isfinite(t) || t < last_t || (t == last_t && last_was_det && !is_det)) {
        throw DataError("event " + std::to_string(i) + " is out of time order");
      }
      if (is_det && !(std::get<Detection>(events[i]).slant_range > 0.0)) {
        throw DataError("event " + std::to_string(i) + " has a non-positive slant range");
      }
      if (!is_det && !is_spd(std::get<OdometryEvent>(events[i]).delta.cov)) {
        throw DataError("event " + std::to_string(i) + " has a non-SPD odometry covariance");
      }
      last_t = t;
      last_was_det = is_det;
    }
  }

  friend bool operator==(const SurveyDataset &, const SurveyDataset &) = default;
};

}  // namespace farmslam
