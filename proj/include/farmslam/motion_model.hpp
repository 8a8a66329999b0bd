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
 * @file motion_model.hpp
 * @brief Dead-reckoning propagation of the planar vehicle state.
 */

#pragma once

#include <span>
#include <vector>

#include "farmslam/core_types.hpp"

namespace farmslam
{

struct DrState
{
  Pose2 pose;
  double t = 0.0;

  friend bool operator==(const DrState &, const DrState &) = default;
};

/// Mean of the Gaussian motion model: the body-frame delta applied to @p prev.
inline Pose2 propagate(const Pose2 & prev, const OdometryDelta & u)
{
  return compose(prev, u.as_pose());
}

/// Integrates a sequence of deltas. The result has deltas.size() + 1 poses.
inline std::vector<Pose2> dr_trajectory(const Pose2 & initial, std::span<const OdometryDelta> deltas)
{
  std::vector<Pose2> out;
  out.reserve(deltas.size() + 1);
  out.push_back(initial);
  for (const auto & u : deltas) {
    out.push_back(propagate(out.back(), u));
  }
  return out;
}

}  // namespace farmslam
