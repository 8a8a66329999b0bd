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
 * @file factor_graph.hpp
 * @brief Planar landmark SLAM factor graph with a sparse Levenberg-Marquardt back-end.
 *
 * Variables are vehicle poses, buoy positions and rope-segment positions.
 * Every factor is Gaussian, so the MAP estimate is the minimiser of the
 * summed squared whitened residuals. Incremental updates re-optimise the
 * whole graph warm-started from the previous solution, which gives exactly
 * the batch answer at a cost dominated by one or two sparse factorisations.
 */

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "farmslam/core_types.hpp"
#include "farmslam/sss_geometry.hpp"

namespace farmslam
{

enum class VariableKind : std::uint8_t { pose, buoy, rope };

inline std::string_view to_string(VariableKind k)
{
  switch (k) {
    case VariableKind::pose: return "pose";
    case VariableKind::buoy: return "buoy";
    case VariableKind::rope: return "rope";
  }
  return "?";
}

/// Tangent-space dimension of a variable kind.
constexpr int dimension(VariableKind k) { return k == VariableKind::pose ? 3 : 2; }

struct VariableId
{
  VariableKind kind = VariableKind::pose;
  std::size_t index = 0;

  friend auto operator<=>(const VariableId &, const VariableId &) = default;
};

inline VariableId pose_id(std::size_t i) { return {VariableKind::pose, i}; }
inline VariableId buoy_id(std::size_t i) { return {VariableKind::buoy, i}; }
inline VariableId rope_id(std::size_t i) { return {VariableKind::rope, i}; }

enum class FactorKind : std::uint8_t { pose_prior, odometry, buoy_prior, rope_prior, buoy_obs, rope_obs };

inline constexpr std::array<FactorKind, 6> kAllFactorKinds{
  FactorKind::pose_prior, FactorKind::odometry, FactorKind::buoy_prior,
  FactorKind::rope_prior, FactorKind::buoy_obs, FactorKind::rope_obs};

inline std::string_view to_string(FactorKind k)
{
  switch (k) {
    case FactorKind::pose_prior: return "pose_prior";
    case FactorKind::odometry: return "odometry";
    case FactorKind::buoy_prior: return "buoy_prior";
    case FactorKind::rope_prior: return "rope_prior";
    case FactorKind::buoy_obs: return "buoy_obs";
    case FactorKind::rope_obs: return "rope_obs";
  }
  return "?";
}

/// Variable kinds a factor of kind @p k must connect, in order.
inline std::vector<VariableKind> expected_signature(FactorKind k)
{
  using VK = VariableKind;
  switch (k) {
    case FactorKind::pose_prior: return {VK::pose};
    case FactorKind::odometry: return {VK::pose, VK::pose};
    case FactorKind::buoy_prior: return {VK::buoy};
    case FactorKind::rope_prior: return {VK::rope};
    case FactorKind::buoy_obs: return {VK::pose, VK::buoy};
    case FactorKind::rope_obs: return {VK::pose, VK::rope};
  }
  return {};
}

inline int residual_dimension(FactorKind k)
{
  return (k == FactorKind::pose_prior || k == FactorKind::odometry) ? 3 : 2;
}

// ---------------------------------------------------------------------------
// Values

/// Assignment of a value to every variable, stored densely per kind.
struct Values
{
  std::vector<Pose2> poses;
  std::vector<Point2> buoys;
  std::vector<Point2> ropes;

  std::size_t count(VariableKind k) const
  {
    switch (k) {
      case VariableKind::pose: return poses.size();
      case VariableKind::buoy: return buoys.size();
      case VariableKind::rope: return ropes.size();
    }
    return 0;
  }

  bool contains(VariableId id) const { return id.index < count(id.kind); }

  const Pose2 & pose(VariableId id) const { return poses.at(id.index); }

  const Point2 & landmark(VariableId id) const
  {
    return id.kind == VariableKind::buoy ? buoys.at(id.index) : ropes.at(id.index);
  }

  Point2 & landmark(VariableId id)
  {
    return id.kind == VariableKind::buoy ? buoys.at(id.index) : ropes.at(id.index);
  }

  Eigen::VectorXd get(VariableId id) const
  {
    if (id.kind == VariableKind::pose) {
      return pose(id).vec();
    }
    return landmark(id).vec();
  }

  /// Applies an additive tangent update to one variable (heading re-wrapped).
  void retract(VariableId id, const Eigen::Ref<const Eigen::VectorXd> & delta)
  {
    if (id.kind == VariableKind::pose) {
      auto & p = poses.at(id.index);
      p = Pose2(p.x + delta[0], p.y + delta[1], p.theta + delta[2]);
    } else {
      auto & l = landmark(id);
      l.x += delta[0];
      l.y += delta[1];
    }
  }
};

// ---------------------------------------------------------------------------
// Factors

struct RangeBearingMeasurement
{
  double range = 0.0;
  double bearing = 0.0;
};

/// Pose2 for pose priors and odometry, Point2 for landmark priors,
/// range/bearing for observations.
using FactorMeasurement = std::variant<Pose2, Point2, RangeBearingMeasurement>;

using Residual = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using JacobianBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

class Factor
{
public:
  Factor(FactorKind kind, std::vector<VariableId> vars, FactorMeasurement measurement,
    const Eigen::MatrixXd & noise)
  : kind_(kind), vars_(std::move(vars)), measurement_(measurement), noise_(noise)
  {
    const int dim = residual_dimension(kind);
    if (noise.rows() != dim || !is_spd(noise)) {
      throw NoiseNotSPD(std::string(to_string(kind)) + ": noise covariance is not SPD of dimension " +
        std::to_string(dim));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(noise);
    // r_w = L^-1 r, with noise = L L^T.
    whitener_ = llt.matrixL().solve(Eigen::MatrixXd::Identity(dim, dim));
  }

  static Factor pose_prior(VariableId pose, const Pose2 & mean, const Eigen::Matrix3d & cov)
  {
    return {FactorKind::pose_prior, {pose}, mean, cov};
  }

  static Factor odometry(VariableId from, VariableId to, const OdometryDelta & delta)
  {
    return {FactorKind::odometry, {from, to}, delta.as_pose(), delta.cov};
  }

  static Factor buoy_prior(VariableId buoy, const Gaussian2 & prior)
  {
    return {FactorKind::buoy_prior, {buoy}, prior.mean, prior.cov};
  }

  static Factor rope_prior(VariableId rope, const Gaussian2 & prior)
  {
    return {FactorKind::rope_prior, {rope}, prior.mean, prior.cov};
  }

  static Factor buoy_obs(VariableId pose, VariableId buoy, const RangeBearing & meas)
  {
    return {FactorKind::buoy_obs, {pose, buoy}, RangeBearingMeasurement{meas.range, meas.bearing},
      meas.cov};
  }

  static Factor rope_obs(VariableId pose, VariableId rope, const RangeBearing & meas)
  {
    return {FactorKind::rope_obs, {pose, rope}, RangeBearingMeasurement{meas.range, meas.bearing},
      meas.cov};
  }

  FactorKind kind() const { return kind_; }
  const std::vector<VariableId> & variables() const { return vars_; }
  const FactorMeasurement & measurement() const { return measurement_; }
  const Eigen::MatrixXd & noise() const { return noise_; }
  const Eigen::MatrixXd & whitener() const { return whitener_; }
  int dim() const { return residual_dimension(kind_); }

private:
  FactorKind kind_;
  std::vector<VariableId> vars_;
  FactorMeasurement measurement_;
  Eigen::MatrixXd noise_;
  Eigen::MatrixXd whitener_;
};

namespace detail
{

struct RawLinearization
{
  Residual residual;
  std::array<JacobianBlock, 2> jacobians;
};

inline Eigen::Matrix2d rotation_transpose_derivative(double theta)
{
  // d/dtheta of R(theta)^T
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d d;
  d << -s, c, -c, -s;
  return d;
}

inline RawLinearization evaluate(const Factor & f, const Values & values, bool want_jacobians)
{
  RawLinearization out;
  const auto & vars = f.variables();
  switch (f.kind()) {
    case FactorKind::pose_prior: {
      const auto & prior = std::get<Pose2>(f.measurement());
      const auto & p = values.pose(vars[0]);
      out.residual = Eigen::Vector3d(p.x - prior.x, p.y - prior.y, wrap_angle(p.theta - prior.theta));
      if (want_jacobians) {
        out.jacobians[0] = Eigen::Matrix3d::Identity();
      }
      break;
    }
    case FactorKind::odometry: {
      const auto & meas = std::get<Pose2>(f.measurement());
      const auto & a = values.pose(vars[0]);
      const auto & b = values.pose(vars[1]);
      const Eigen::Matrix2d rat = a.rotation().transpose();
      const Eigen::Matrix2d rmt = meas.rotation().transpose();
      const Eigen::Vector2d dt = b.translation().vec() - a.translation().vec();
      const Eigen::Vector2d pred_t = rat * dt;
      // Error of the predicted relative pose expressed in the measured frame.
      Eigen::Vector3d r;
      r.head<2>() = rmt * (pred_t - meas.translation().vec());
      r[2] = wrap_angle(b.theta - a.theta - meas.theta);
      out.residual = r;
      if (want_jacobians) {
        Eigen::Matrix3d ja = Eigen::Matrix3d::Zero();
        ja.topLeftCorner<2, 2>() = -rmt * rat;
        ja.block<2, 1>(0, 2) = rmt * rotation_transpose_derivative(a.theta) * dt;
        ja(2, 2) = -1.0;
        Eigen::Matrix3d jb = Eigen::Matrix3d::Zero();
        jb.topLeftCorner<2, 2>() = rmt * rat;
        jb(2, 2) = 1.0;
        out.jacobians[0] = ja;
        out.jacobians[1] = jb;
      }
      break;
    }
    case FactorKind::buoy_prior:
    case FactorKind::rope_prior: {
      const auto & mean = std::get<Point2>(f.measurement());
      out.residual = (values.landmark(vars[0]) - mean).vec();
      if (want_jacobians) {
        out.jacobians[0] = Eigen::Matrix2d::Identity();
      }
      break;
    }
    case FactorKind::buoy_obs:
    case FactorKind::rope_obs: {
      const auto & meas = std::get<RangeBearingMeasurement>(f.measurement());
      const auto & p = values.pose(vars[0]);
      const auto & l = values.landmark(vars[1]);
      const auto pred = predict_range_bearing(p, l);
      out.residual = Eigen::Vector2d(pred.range - meas.range, wrap_angle(pred.bearing - meas.bearing));
      if (want_jacobians) {
        const double dx = l.x - p.x;
        const double dy = l.y - p.y;
        const double r = pred.range;
        const double r2 = r * r;
        Eigen::Matrix<double, 2, 3> jp;
        jp << -dx / r, -dy / r, 0.0,
          dy / r2, -dx / r2, -1.0;
        Eigen::Matrix2d jl;
        jl << dx / r, dy / r,
          -dy / r2, dx / r2;
        out.jacobians[0] = jp;
        out.jacobians[1] = jl;
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Unwhitened residual of a factor at @p values.
inline Residual residual(const Factor & factor, const Values & values)
{
  return detail::evaluate(factor, values, false).residual;
}

/// Whitened residual and whitened Jacobian blocks, one per connected variable.
struct Linearization
{
  Residual residual;
  std::array<JacobianBlock, 2> jacobians;
  std::size_t arity = 0;
};

inline Linearization linearize(const Factor & factor, const Values & values)
{
  auto raw = detail::evaluate(factor, values, true);
  const auto & w = factor.whitener();
  Linearization lin;
  lin.arity = factor.variables().size();
  lin.residual = w * raw.residual;
  for (std::size_t i = 0; i < lin.arity; ++i) {
    lin.jacobians[i] = w * raw.jacobians[i];
  }
  return lin;
}

/// Squared Mahalanobis norm of the factor residual.
inline double factor_chi2(const Factor & factor, const Values & values)
{
  return (factor.whitener() * residual(factor, values)).squaredNorm();
}

// ---------------------------------------------------------------------------
// Solver

struct SolverConfig
{
  double relative_tolerance = 1e-9;
  /// Convergence also requires the estimated remaining distance to the
  /// optimum (max norm of the tangent update) to be this small.
  double step_tolerance = 1e-8;
  int max_iterations = 100;
  double initial_lambda = 1e-4;
  double lambda_factor = 10.0;
  double max_lambda = 1e12;
  /// Pivots of the undamped information matrix smaller than this fraction of
  /// the largest pivot indicate an unobservable direction.
  double singular_threshold = 1e-12;
};

struct GraphEstimate
{
  Values values;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  /// chi2 after every accepted LM step, starting with the initial value.
  /// Final undamped refinement steps are not listed.
  std::vector<double> chi2_trace;
};

using FactorId = std::size_t;

/// Tangent-space layout of the stacked state: poses in time order, then
/// buoys, then rope landmarks.
struct StateLayout
{
  std::size_t num_poses = 0;
  std::size_t num_buoys = 0;
  std::size_t num_ropes = 0;

  explicit StateLayout(const Values & v)
  : num_poses(v.poses.size()), num_buoys(v.buoys.size()), num_ropes(v.ropes.size()) {}

  Eigen::Index offset(VariableId id) const
  {
    switch (id.kind) {
      case VariableKind::pose: return static_cast<Eigen::Index>(3 * id.index);
      case VariableKind::buoy: return static_cast<Eigen::Index>(3 * num_poses + 2 * id.index);
      case VariableKind::rope:
        return static_cast<Eigen::Index>(3 * num_poses + 2 * num_buoys + 2 * id.index);
    }
    return 0;
  }

  Eigen::Index size() const
  {
    return static_cast<Eigen::Index>(3 * num_poses + 2 * (num_buoys + num_ropes));
  }
};

/// Gauss-Newton normal equations H dx = -g at one linearisation point.
struct NormalEquations
{
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double chi2 = 0.0;
};

inline NormalEquations build_normal_equations(
  std::span<const Factor> factors, const Values & values, const StateLayout & layout)
{
  NormalEquations ne;
  const Eigen::Index n = layout.size();
  ne.gradient = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(factors.size() * 25);
  for (const auto & f : factors) {
    const auto lin = linearize(f, values);
    ne.chi2 += lin.residual.squaredNorm();
    const auto & vars = f.variables();
    for (std::size_t a = 0; a < lin.arity; ++a) {
      const Eigen::Index oa = layout.offset(vars[a]);
      const auto & ja = lin.jacobians[a];
      ne.gradient.segment(oa, ja.cols()) += ja.transpose() * lin.residual;
      for (std::size_t b = 0; b < lin.arity; ++b) {
        const Eigen::Index ob = layout.offset(vars[b]);
        const auto & jb = lin.jacobians[b];
        const JacobianBlock block = ja.transpose() * jb;
        for (Eigen::Index i = 0; i < block.rows(); ++i) {
          for (Eigen::Index j = 0; j < block.cols(); ++j) {
            triplets.emplace_back(oa + i, ob + j, block(i, j));
          }
        }
      }
    }
  }
  ne.hessian.resize(n, n);
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  return ne;
}

inline double total_chi2(std::span<const Factor> factors, const Values & values)
{
  double chi2 = 0.0;
  for (const auto & f : factors) {
    chi2 += factor_chi2(f, values);
  }
  return chi2;
}

inline void retract_all(Values & values, const StateLayout & layout, const Eigen::VectorXd & delta)
{
  for (std::size_t i = 0; i < layout.num_poses; ++i) {
    values.retract(pose_id(i), delta.segment<3>(layout.offset(pose_id(i))));
  }
  for (std::size_t i = 0; i < layout.num_buoys; ++i) {
    values.retract(buoy_id(i), delta.segment<2>(layout.offset(buoy_id(i))));
  }
  for (std::size_t i = 0; i < layout.num_ropes; ++i) {
    values.retract(rope_id(i), delta.segment<2>(layout.offset(rope_id(i))));
  }
}

using SparseLdlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
    Eigen::AMDOrdering<int>>;

/// Throws SingularSystem unless @p ldlt holds a numerically positive-definite
/// factorisation.
inline void check_positive_definite(const SparseLdlt & ldlt, double threshold)
{
  if (ldlt.info() != Eigen::Success) {
    throw SingularSystem("information matrix factorisation failed");
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  if (d.size() == 0) {
    return;
  }
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmax > 0.0) || dmin <= threshold * dmax) {
    throw SingularSystem("information matrix is rank deficient (is every variable anchored?)");
  }
}

/// Near a flat minimum chi2 differences drown in round-off before the
/// gradient is gone. Undamped steps are taken while the step is above the
/// tolerance and each one shrinks the gradient.
inline void refine(std::span<const Factor> factors, GraphEstimate & est, const StateLayout & layout,
  SparseLdlt & ldlt, const SolverConfig & config)
{
  auto ne = build_normal_equations(factors, est.values, layout);
  for (int it = 0; it < 10; ++it) {
    ldlt.factorize(ne.hessian);
    if (ldlt.info() != Eigen::Success) {
      return;
    }
    const Eigen::VectorXd delta = ldlt.solve(-ne.gradient);
    if (delta.lpNorm<Eigen::Infinity>() < config.step_tolerance) {
      return;
    }
    Values candidate = est.values;
    retract_all(candidate, layout, delta);
    auto next = build_normal_equations(factors, candidate, layout);
    // chi2 may wobble at round-off level here; larger rises mean the
    // quadratic model is off and the LM result stands.
    if (!(next.gradient.norm() < ne.gradient.norm()) || next.chi2 > est.chi2 * (1.0 + 1e-12)) {
      return;
    }
    est.values = std::move(candidate);
    est.chi2 = next.chi2;
    ne = std::move(next);
  }
}

/// Levenberg-Marquardt on the sparse normal equations, starting at @p start.
inline GraphEstimate levenberg_marquardt(
  std::span<const Factor> factors, Values start, const SolverConfig & config)
{
  GraphEstimate est;
  est.values = std::move(start);
  const StateLayout layout(est.values);
  if (layout.size() == 0) {
    est.converged = true;
    return est;
  }

  auto ne = build_normal_equations(factors, est.values, layout);
  est.chi2 = ne.chi2;
  est.chi2_trace.push_back(est.chi2);

  SparseLdlt ldlt;
  ldlt.analyzePattern(ne.hessian);
  ldlt.factorize(ne.hessian);
  check_positive_definite(ldlt, config.singular_threshold);

  double lambda = config.initial_lambda;
  double prev_step = 0.0;
  Eigen::SparseMatrix<double> damped;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    est.iterations = iter + 1;
    damped = ne.hessian;
    for (Eigen::Index i = 0; i < damped.rows(); ++i) {
      damped.coeffRef(i, i) *= 1.0 + lambda;
    }
    ldlt.factorize(damped);
    if (ldlt.info() != Eigen::Success) {
      lambda *= config.lambda_factor;
      continue;
    }
    const Eigen::VectorXd delta = ldlt.solve(-ne.gradient);
    Values candidate = est.values;
    retract_all(candidate, layout, delta);
    const double chi2 = total_chi2(factors, candidate);
    if (chi2 <= est.chi2) {
      const double decrease = est.chi2 > 0.0 ? (est.chi2 - chi2) / est.chi2 : 0.0;
      est.values = std::move(candidate);
      est.chi2 = chi2;
      est.chi2_trace.push_back(chi2);
      lambda /= config.lambda_factor;
      // Remaining distance to the optimum under linear convergence, with the
      // rate estimated from consecutive accepted steps.
      const double step = delta.lpNorm<Eigen::Infinity>();
      const double rate = prev_step > 0.0 ? std::min(step / prev_step, 0.999) : 0.5;
      const double remaining = step * std::max(1.0, rate / (1.0 - rate));
      prev_step = step;
      if (decrease < config.relative_tolerance && remaining < config.step_tolerance) {
        est.converged = true;
        break;
      }
      ne = build_normal_equations(factors, est.values, layout);
    } else {
      lambda *= config.lambda_factor;
      if (lambda > config.max_lambda) {
        // No descent direction left at this precision: a minimum.
        est.converged = true;
        break;
      }
    }
  }
  if (est.converged) {
    refine(factors, est, layout, ldlt, config);
  }
  return est;
}

/// Marginal covariances at a fixed linearisation point.
class Marginals
{
public:
  Marginals(std::span<const Factor> factors, const Values & values, double singular_threshold = 1e-12)
  : layout_(values)
  {
    const auto ne = build_normal_equations(factors, values, layout_);
    ldlt_.compute(ne.hessian);
    check_positive_definite(ldlt_, singular_threshold);
  }

  Eigen::MatrixXd covariance(VariableId id) const
  {
    const int d = dimension(id.kind);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(layout_.size(), d);
    const auto off = layout_.offset(id);
    rhs.block(off, 0, d, d).setIdentity();
    const Eigen::MatrixXd cols = ldlt_.solve(rhs);
    Eigen::MatrixXd block = cols.block(off, 0, d, d);
    return 0.5 * (block + block.transpose());
  }

private:
  StateLayout layout_;
  SparseLdlt ldlt_;
};

/// Single-writer factor graph holding the current linearisation point.
class FactorGraph
{
public:
  /// Registers a variable; @p initial must have the kind's dimension.
  VariableId add_variable(VariableKind kind, const Eigen::VectorXd & initial)
  {
    if (initial.size() != dimension(kind)) {
      throw ArityMismatch("initial value of a " + std::string(to_string(kind)) +
        " variable must have dimension " + std::to_string(dimension(kind)));
    }
    if (!initial.allFinite()) {
      throw InvalidArgument("initial value must be finite");
    }
    if (kind == VariableKind::pose) {
      return add_pose(Pose2::from(initial));
    }
    return add_landmark(kind, Point2::from(initial));
  }

  VariableId add_pose(const Pose2 & initial)
  {
    initial_.poses.push_back(initial);
    estimate_.poses.push_back(initial);
    return pose_id(initial_.poses.size() - 1);
  }

  VariableId add_landmark(VariableKind kind, Point2 initial)
  {
    if (kind == VariableKind::pose) {
      throw ArityMismatch("add_landmark called with pose kind");
    }
    auto & init = kind == VariableKind::buoy ? initial_.buoys : initial_.ropes;
    auto & cur = kind == VariableKind::buoy ? estimate_.buoys : estimate_.ropes;
    init.push_back(initial);
    cur.push_back(initial);
    return {kind, init.size() - 1};
  }

  FactorId add_factor(Factor factor)
  {
    const auto sig = expected_signature(factor.kind());
    const auto & vars = factor.variables();
    if (vars.size() != sig.size()) {
      throw ArityMismatch(std::string(to_string(factor.kind())) + " connects " +
        std::to_string(sig.size()) + " variable(s), got " + std::to_string(vars.size()));
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].kind != sig[i]) {
        throw ArityMismatch(std::string(to_string(factor.kind())) + " slot " + std::to_string(i) +
          " expects a " + std::string(to_string(sig[i])) + " variable");
      }
      if (!estimate_.contains(vars[i])) {
        throw UnknownVariable(std::string(to_string(vars[i].kind)) + " " +
          std::to_string(vars[i].index) + " is not in the graph");
      }
    }
    if (factor.kind() == FactorKind::odometry && vars[0] == vars[1]) {
      throw ArityMismatch("odometry factor must connect two distinct poses");
    }
    factors_.push_back(std::move(factor));
    stale_ = true;
    return factors_.size() - 1;
  }

  const std::vector<Factor> & factors() const { return factors_; }
  std::size_t num_factors() const { return factors_.size(); }
  std::size_t num_variables() const
  {
    return estimate_.poses.size() + estimate_.buoys.size() + estimate_.ropes.size();
  }

  std::size_t count_factors(FactorKind k) const
  {
    return static_cast<std::size_t>(std::count_if(
      factors_.begin(), factors_.end(), [k](const Factor & f) { return f.kind() == k; }));
  }

  /// Values every variable was created with.
  const Values & initial_values() const { return initial_; }
  /// Current linearisation point (the latest solution).
  const Values & estimate() const { return estimate_; }
  bool stale() const { return stale_; }

  double chi2() const { return total_chi2(factors_, estimate_); }

  /// Cold solve of the whole graph from the initial values.
  GraphEstimate solve_batch(const SolverConfig & config = {})
  {
    auto est = levenberg_marquardt(factors_, initial_, config);
    estimate_ = est.values;
    stale_ = false;
    return est;
  }

  /// Adds @p new_factors (their variables must already be registered) and
  /// re-optimises warm-started from the current estimate.
  GraphEstimate update_incremental(std::span<const Factor> new_factors = {},
    const SolverConfig & config = {})
  {
    for (const auto & f : new_factors) {
      add_factor(f);
    }
    auto est = levenberg_marquardt(factors_, estimate_, config);
    estimate_ = est.values;
    stale_ = false;
    return est;
  }

  Marginals marginals(double singular_threshold = 1e-12) const
  {
    return Marginals(factors_, estimate_, singular_threshold);
  }

  Eigen::MatrixXd marginal_covariance(VariableId id) const
  {
    if (!estimate_.contains(id)) {
      throw UnknownVariable("marginal_covariance: unknown variable");
    }
    return marginals().covariance(id);
  }

  /// One line per factor: index, kind, connected variables, whitened residual norm.
  void dump(std::ostream & os) const
  {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const auto & f = factors_[i];
      os << i << ' ' << to_string(f.kind());
      for (const auto & v : f.variables()) {
        os << ' ' << to_string(v.kind) << v.index;
      }
      os << ' ' << std::sqrt(factor_chi2(f, estimate_)) << '\n';
    }
  }

private:
  Values initial_;
  Values estimate_;
  std::vector<Factor> factors_;
  bool stale_ = false;
};

}  // namespace farmslam
