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

// Central finite-difference Jacobians of factor residuals.

#pragma once

#include <Eigen/Dense>

#include "farmslam/factor_graph.hpp"

namespace oracle
{

/// Residual components that are angles and must be differenced on the circle.
inline bool is_angle_component(farmslam::FactorKind k, int row)
{
  using farmslam::FactorKind;
  switch (k) {
    case FactorKind::pose_prior:
    case FactorKind::odometry: return row == 2;
    case FactorKind::buoy_obs:
    case FactorKind::rope_obs: return row == 1;
    default: return false;
  }
}

/// d residual / d (local coordinates of the variable in @p slot).
inline Eigen::MatrixXd numeric_jacobian(
  const farmslam::Factor & f, const farmslam::Values & values, std::size_t slot, double h = 1e-6)
{
  const auto id = f.variables().at(slot);
  const int n = farmslam::dimension(id.kind);
  const int m = f.dim();
  Eigen::MatrixXd j(m, n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    step[c] = h;
    auto plus = values;
    auto minus = values;
    plus.retract(id, step);
    minus.retract(id, -step);
    const Eigen::VectorXd rp = farmslam::residual(f, plus);
    const Eigen::VectorXd rm = farmslam::residual(f, minus);
    for (int r = 0; r < m; ++r) {
      double d = rp[r] - rm[r];
      if (is_angle_component(f.kind(), r)) {
        d = std::remainder(d, 2.0 * M_PI);
      }
      j(r, c) = d / (2.0 * h);
    }
  }
  return j;
}

/// Largest elementwise |a - b| / max(1, |a|).
inline double max_relative_error(const Eigen::MatrixXd & a, const Eigen::MatrixXd & b)
{
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double den = std::max(1.0, std::abs(a.data()[i]));
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / den);
  }
  return worst;
}

}  // namespace oracle
