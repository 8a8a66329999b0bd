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
 * @file association.hpp
 * @brief Farm prior map, rope priors and the detection-to-factor front-end.
 *
 * Three strategies turn the detection stream into factors:
 *  - proposed: every rope detection becomes its own landmark carrying a copy
 *    of the rope's elongated prior, so poses can slide along the rope;
 *  - baseline_shared_rope: one landmark per physical rope, shared by all of
 *    its detections;
 *  - baseline_buoy_only: rope detections are discarded.
 * Buoy detections are matched by maximum likelihood in every mode.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "farmslam/core_types.hpp"
#include "farmslam/factor_graph.hpp"
#include "farmslam/motion_model.hpp"
#include "farmslam/sss_geometry.hpp"

namespace farmslam
{

enum class MethodKind { proposed, baseline_shared_rope, baseline_buoy_only };

inline constexpr std::array<MethodKind, 3> kAllMethods{
  MethodKind::baseline_buoy_only, MethodKind::baseline_shared_rope, MethodKind::proposed};

inline std::string_view to_string(MethodKind m)
{
  switch (m) {
    case MethodKind::proposed: return "proposed";
    case MethodKind::baseline_shared_rope: return "baseline_shared_rope";
    case MethodKind::baseline_buoy_only: return "baseline_buoy_only";
  }
  return "?";
}

/// Row label used in comparison tables.
inline std::string_view display_name(MethodKind m)
{
  switch (m) {
    case MethodKind::proposed: return "Proposed";
    case MethodKind::baseline_shared_rope: return "Baseline 2";
    case MethodKind::baseline_buoy_only: return "Baseline 1";
  }
  return "?";
}

inline std::optional<MethodKind> parse_method(std::string_view s)
{
  if (s == "proposed") {
    return MethodKind::proposed;
  }
  if (s == "baseline_shared_rope" || s == "shared" || s == "baseline2") {
    return MethodKind::baseline_shared_rope;
  }
  if (s == "baseline_buoy_only" || s == "buoy_only" || s == "baseline1") {
    return MethodKind::baseline_buoy_only;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Farm model

struct Buoy
{
  int id = 0;
  Gaussian2 prior;
};

struct Rope
{
  int id = 0;
  int buoy_a = 0;
  int buoy_b = 0;
  double depth = 1.5;
};

struct FarmModel
{
  std::vector<Buoy> buoys;
  std::vector<Rope> ropes;
  double buoy_depth = 0.0;

  const Buoy * find_buoy(int id) const
  {
    auto it = std::find_if(buoys.begin(), buoys.end(), [id](const Buoy & b) { return b.id == id; });
    return it == buoys.end() ? nullptr : &*it;
  }

  const Rope * find_rope(int id) const
  {
    auto it = std::find_if(ropes.begin(), ropes.end(), [id](const Rope & r) { return r.id == id; });
    return it == ropes.end() ? nullptr : &*it;
  }

  /// Throws InvalidArgument when ids are duplicated or a rope references
  /// missing or identical buoys.
  void validate() const
  {
    for (std::size_t i = 0; i < buoys.size(); ++i) {
      for (std::size_t j = i + 1; j < buoys.size(); ++j) {
        if (buoys[i].id == buoys[j].id) {
          throw InvalidArgument("duplicate buoy id " + std::to_string(buoys[i].id));
        }
      }
      if (!is_spd(buoys[i].prior.cov)) {
        throw InvalidArgument("buoy " + std::to_string(buoys[i].id) + " prior covariance not SPD");
      }
    }
    for (std::size_t i = 0; i < ropes.size(); ++i) {
      const auto & r = ropes[i];
      for (std::size_t j = i + 1; j < ropes.size(); ++j) {
        if (r.id == ropes[j].id) {
          throw InvalidArgument("duplicate rope id " + std::to_string(r.id));
        }
      }
      if (r.buoy_a == r.buoy_b || !find_buoy(r.buoy_a) || !find_buoy(r.buoy_b)) {
        throw InvalidArgument("rope " + std::to_string(r.id) + " must join two distinct known buoys");
      }
    }
  }

  friend bool operator==(const FarmModel & a, const FarmModel & b)
  {
    if (a.buoy_depth != b.buoy_depth || a.buoys.size() != b.buoys.size() ||
      a.ropes.size() != b.ropes.size())
    {
      return false;
    }
    for (std::size_t i = 0; i < a.buoys.size(); ++i) {
      const auto & x = a.buoys[i];
      const auto & y = b.buoys[i];
      if (x.id != y.id || !(x.prior.mean == y.prior.mean) || x.prior.cov != y.prior.cov) {
        return false;
      }
    }
    for (std::size_t i = 0; i < a.ropes.size(); ++i) {
      const auto & x = a.ropes[i];
      const auto & y = b.ropes[i];
      if (x.id != y.id || x.buoy_a != y.buoy_a || x.buoy_b != y.buoy_b || x.depth != y.depth) {
        return false;
      }
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Rope priors

/// Elongated Gaussian over the position of any point of one rope.
struct RopePriorSpec
{
  int rope_id = 0;
  Point2 mean;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  /// Unit vector from buoy_a to buoy_b.
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();

  Gaussian2 gaussian() const { return {mean, cov}; }
};

/// Prior centred between the mooring buoys, wide along the rope and narrow
/// across it. With no @p sigma_along, half the buoy spacing is used.
inline RopePriorSpec make_rope_prior(
  const FarmModel & farm, int rope, std::optional<double> sigma_along, double sigma_across)
{
  const Rope * r = farm.find_rope(rope);
  if (!r) {
    throw InvalidArgument("unknown rope id " + std::to_string(rope));
  }
  const Buoy * a = farm.find_buoy(r->buoy_a);
  const Buoy * b = farm.find_buoy(r->buoy_b);
  if (!a || !b) {
    throw InvalidArgument("rope references an unknown buoy");
  }
  const Eigen::Vector2d span = b->prior.mean.vec() - a->prior.mean.vec();
  const double length = span.norm();
  if (length < 1e-9) {
    throw DegenerateRope("rope " + std::to_string(rope) + " has coincident mooring buoys");
  }
  const double along = sigma_along.value_or(0.5 * length);
  if (!(along > 0.0) || !(sigma_across > 0.0)) {
    throw InvalidArgument("rope prior sigmas must be positive");
  }
  RopePriorSpec spec;
  spec.rope_id = rope;
  spec.mean = Point2::from(0.5 * (a->prior.mean.vec() + b->prior.mean.vec()));
  spec.direction = span / length;
  Eigen::Matrix2d rot;
  rot.col(0) = spec.direction;
  rot.col(1) = Eigen::Vector2d(-spec.direction.y(), spec.direction.x());
  const Eigen::Vector2d variances(along * along, sigma_across * sigma_across);
  spec.cov = rot * variances.asDiagonal() * rot.transpose();
  spec.cov = 0.5 * (spec.cov + spec.cov.transpose());
  return spec;
}

// ---------------------------------------------------------------------------
// Maximum-likelihood association

/// Chi-square quantile with 2 dof at 0.999.
inline constexpr double kChi2Gate2Dof999 = 13.815510557964274;

inline double mahalanobis2(const Eigen::Vector2d & diff, const Eigen::Matrix2d & cov)
{
  return diff.dot(cov.ldlt().solve(diff));
}

/// Covariance of the world point landmark_from_measurement(pose, meas).
inline Eigen::Matrix2d projected_covariance(
  const Pose2 & pose, const Eigen::Matrix3d & pose_cov, const RangeBearing & meas)
{
  const double a = pose.theta + meas.bearing;
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix<double, 2, 3> jp;
  jp << 1.0, 0.0, -meas.range * s,
    0.0, 1.0, meas.range * c;
  Eigen::Matrix2d jm;
  jm << c, -meas.range * s,
    s, meas.range * c;
  return jp * pose_cov * jp.transpose() + jm * meas.cov * jm.transpose();
}

/// Current belief over one buoy: estimate and marginal covariance.
struct BuoyBelief
{
  int id = 0;
  Point2 mean;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

struct BuoyMatch
{
  std::optional<int> buoy_id;
  double mahalanobis2 = std::numeric_limits<double>::infinity();
};

/// Nearest buoy in Mahalanobis distance, rejected beyond @p gate. Ties go to
/// the lowest id.
inline BuoyMatch associate_buoy(const RangeBearing & meas, const Pose2 & pose_est,
  const Eigen::Matrix3d & pose_cov, std::span<const BuoyBelief> buoys, double gate = kChi2Gate2Dof999)
{
  const Point2 w = landmark_from_measurement(pose_est, meas);
  const Eigen::Matrix2d proj = projected_covariance(pose_est, pose_cov, meas);
  std::vector<const BuoyBelief *> order;
  for (const auto & b : buoys) {
    order.push_back(&b);
  }
  std::sort(order.begin(), order.end(), [](auto * x, auto * y) { return x->id < y->id; });

  BuoyMatch best;
  int best_id = 0;
  for (const auto * b : order) {
    const double d2 = mahalanobis2((w - b->mean).vec(), b->cov + proj);
    if (d2 < best.mahalanobis2) {
      best.mahalanobis2 = d2;
      best_id = b->id;
    }
  }
  if (!order.empty() && best.mahalanobis2 <= gate) {
    best.buoy_id = best_id;
  }
  return best;
}

struct RopeMatch
{
  int rope_id = -1;
  double mahalanobis2 = std::numeric_limits<double>::infinity();
  /// Best match still lies outside the gate.
  bool low_confidence = true;
};

/// Rope whose prior best explains the projected detection. Always returns a
/// rope when any exist; ties go to the lowest id.
inline RopeMatch associate_rope(const RangeBearing & meas, const Pose2 & pose_est,
  std::span<const RopePriorSpec> priors, double gate = kChi2Gate2Dof999)
{
  const Point2 w = landmark_from_measurement(pose_est, meas);
  std::vector<const RopePriorSpec *> order;
  for (const auto & p : priors) {
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [](auto * x, auto * y) { return x->rope_id < y->rope_id; });
  RopeMatch best;
  for (const auto * p : order) {
    const double d2 = mahalanobis2((w - p->mean).vec(), p->cov);
    if (d2 < best.mahalanobis2) {
      best.mahalanobis2 = d2;
      best.rope_id = p->rope_id;
    }
  }
  best.low_confidence = !(best.mahalanobis2 <= gate);
  return best;
}

// ---------------------------------------------------------------------------
// Front-end

struct FrontendConfig
{
  Eigen::Matrix3d pose_prior_cov = Eigen::Vector3d(1.0, 1.0, std::pow(deg2rad(5.0), 2)).asDiagonal();
  /// Replaces the per-buoy prior covariances of the farm when set.
  std::optional<Eigen::Matrix2d> buoy_prior_cov;
  Eigen::Matrix2d buoy_obs_cov = Eigen::Vector2d(0.2 * 0.2, 0.05 * 0.05).asDiagonal();
  Eigen::Matrix2d rope_obs_cov = Eigen::Vector2d(0.2 * 0.2, 0.05 * 0.05).asDiagonal();
  std::optional<double> rope_sigma_along;
  double rope_sigma_across = 0.1;
  double buoy_gate = kChi2Gate2Dof999;
  double rope_gate = kChi2Gate2Dof999;
};

/// What happened to one detection.
struct AssociationRecord
{
  double t = 0.0;
  std::size_t pose_index = 0;
  TargetClass klass = TargetClass::rope;
  Channel channel = Channel::port;
  double range = 0.0;
  double bearing = 0.0;
  /// Matched buoy or rope id, -1 when nothing was matched.
  int target_id = -1;
  /// Index of the landmark variable the observation factor points to.
  std::optional<std::size_t> landmark_index;
  bool low_confidence = false;
  bool infeasible = false;
  bool used = false;

  friend bool operator==(const AssociationRecord &, const AssociationRecord &) = default;
};

struct FrontendCounters
{
  std::size_t infeasible = 0;
  std::size_t buoy_rejected = 0;
  std::size_t rope_low_confidence = 0;
  std::size_t rope_discarded = 0;

  friend bool operator==(const FrontendCounters &, const FrontendCounters &) = default;
};

/// Variables and factors a single call added to the graph.
struct Emission
{
  std::vector<VariableId> variables;
  std::vector<FactorId> factors;
};

class Frontend
{
public:
  Frontend(MethodKind method, FarmModel farm, FrontendConfig config = {})
  : method_(method), farm_(std::move(farm)), config_(std::move(config))
  {
    farm_.validate();
    depths_.buoy_depth = farm_.buoy_depth;
    depths_.rope_depth = farm_.ropes.empty() ? 1.5 : farm_.ropes.front().depth;
    for (const auto & r : farm_.ropes) {
      rope_priors_.push_back(
        make_rope_prior(farm_, r.id, config_.rope_sigma_along, config_.rope_sigma_across));
    }
  }

  MethodKind method() const { return method_; }
  const FarmModel & farm() const { return farm_; }
  const FrontendConfig & config() const { return config_; }
  const std::vector<RopePriorSpec> & rope_priors() const { return rope_priors_; }
  const std::vector<AssociationRecord> & log() const { return log_; }
  const FrontendCounters & counters() const { return counters_; }
  /// Graph variable of each buoy id, in farm order.
  const std::map<int, VariableId> & buoy_variables() const { return buoy_vars_; }
  /// Physical rope id of every rope variable.
  const std::vector<int> & rope_variable_owner() const { return rope_owner_; }

  /// Adds the first pose and its prior, then every buoy with its prior.
  VariableId initialize(FactorGraph & graph, const Pose2 & initial_pose, Emission * out = nullptr)
  {
    Emission local;
    Emission & em = out ? *out : local;
    const auto p0 = graph.add_pose(initial_pose);
    em.variables.push_back(p0);
    em.factors.push_back(graph.add_factor(Factor::pose_prior(p0, initial_pose, config_.pose_prior_cov)));
    for (const auto & b : farm_.buoys) {
      const auto v = graph.add_landmark(VariableKind::buoy, b.prior.mean);
      buoy_vars_[b.id] = v;
      Gaussian2 prior = b.prior;
      if (config_.buoy_prior_cov) {
        prior.cov = *config_.buoy_prior_cov;
      }
      em.variables.push_back(v);
      em.factors.push_back(graph.add_factor(Factor::buoy_prior(v, prior)));
    }
    last_pose_ = p0;
    return p0;
  }

  /// New pose predicted from the latest estimate, tied by an odometry factor.
  VariableId add_odometry(FactorGraph & graph, const OdometryDelta & delta, Emission * out = nullptr)
  {
    const Pose2 predicted = propagate(graph.estimate().pose(last_pose_), delta);
    const auto p = graph.add_pose(predicted);
    const auto f = graph.add_factor(Factor::odometry(last_pose_, p, delta));
    if (out) {
      out->variables.push_back(p);
      out->factors.push_back(f);
    }
    last_pose_ = p;
    return p;
  }

  VariableId last_pose() const { return last_pose_; }

  /// Converts one detection into graph variables and factors attached to @p pose.
  Emission process_detection(const Detection & det, VariableId pose, FactorGraph & graph)
  {
    Emission em;
    AssociationRecord rec;
    rec.t = det.t;
    rec.pose_index = pose.index;
    rec.klass = det.klass;
    rec.channel = det.channel;

    const Eigen::Matrix2d & noise =
      det.klass == TargetClass::buoy ? config_.buoy_obs_cov : config_.rope_obs_cov;
    RangeBearing meas;
    try {
      meas = detection_to_measurement(det, depths_, noise);
    } catch (const InfeasibleGeometry &) {
      rec.infeasible = true;
      ++counters_.infeasible;
      log_.push_back(rec);
      return em;
    }
    rec.range = meas.range;
    rec.bearing = meas.bearing;
    const Pose2 pose_est = graph.estimate().pose(pose);

    if (det.klass == TargetClass::buoy) {
      process_buoy(meas, pose, pose_est, graph, rec, em);
    } else {
      process_rope(det, meas, pose, pose_est, graph, rec, em);
    }
    log_.push_back(rec);
    return em;
  }

private:
  void process_buoy(const RangeBearing & meas, VariableId pose, const Pose2 & pose_est,
    FactorGraph & graph, AssociationRecord & rec, Emission & em)
  {
    const auto marg = graph.marginals();
    std::vector<BuoyBelief> beliefs;
    for (const auto & [id, var] : buoy_vars_) {
      beliefs.push_back({id, graph.estimate().landmark(var), marg.covariance(var)});
    }
    const Eigen::Matrix3d pose_cov = marg.covariance(pose);
    const auto match = associate_buoy(meas, pose_est, pose_cov, beliefs, config_.buoy_gate);
    if (!match.buoy_id) {
      ++counters_.buoy_rejected;
      return;
    }
    const auto var = buoy_vars_.at(*match.buoy_id);
    rec.target_id = *match.buoy_id;
    rec.landmark_index = var.index;
    rec.used = true;
    em.factors.push_back(graph.add_factor(Factor::buoy_obs(pose, var, meas)));
  }

  void process_rope(const Detection & det, RangeBearing meas, VariableId pose,
    const Pose2 & pose_est, FactorGraph & graph, AssociationRecord & rec, Emission & em)
  {
    if (method_ == MethodKind::baseline_buoy_only) {
      ++counters_.rope_discarded;
      return;
    }
    const auto match = associate_rope(meas, pose_est, rope_priors_, config_.rope_gate);
    if (match.rope_id < 0) {
      return;
    }
    rec.target_id = match.rope_id;
    rec.low_confidence = match.low_confidence;
    if (match.low_confidence) {
      ++counters_.rope_low_confidence;
    }
    // Ropes may sit at different depths; re-project with the matched one.
    const Rope * rope = farm_.find_rope(match.rope_id);
    if (rope->depth != depths_.rope_depth) {
      try {
        meas.range = project_slant_to_ground(det.slant_range, det.vehicle_depth, rope->depth);
      } catch (const InfeasibleGeometry &) {
        rec.infeasible = true;
        ++counters_.infeasible;
        return;
      }
      rec.range = meas.range;
    }
    const RopePriorSpec & spec = prior_of(match.rope_id);

    VariableId var;
    if (method_ == MethodKind::proposed) {
      var = graph.add_landmark(VariableKind::rope, landmark_from_measurement(pose_est, meas));
      rope_owner_.push_back(match.rope_id);
      em.variables.push_back(var);
      em.factors.push_back(graph.add_factor(Factor::rope_prior(var, spec.gaussian())));
    } else {
      auto it = shared_rope_vars_.find(match.rope_id);
      if (it == shared_rope_vars_.end()) {
        var = graph.add_landmark(VariableKind::rope, landmark_from_measurement(pose_est, meas));
        rope_owner_.push_back(match.rope_id);
        shared_rope_vars_.emplace(match.rope_id, var);
        em.variables.push_back(var);
        em.factors.push_back(graph.add_factor(Factor::rope_prior(var, spec.gaussian())));
      } else {
        var = it->second;
      }
    }
    em.factors.push_back(graph.add_factor(Factor::rope_obs(pose, var, meas)));
    rec.landmark_index = var.index;
    rec.used = true;
  }

  const RopePriorSpec & prior_of(int rope) const
  {
    return *std::find_if(rope_priors_.begin(), rope_priors_.end(),
             [rope](const RopePriorSpec & s) { return s.rope_id == rope; });
  }

  MethodKind method_;
  FarmModel farm_;
  FrontendConfig config_;
  TargetDepthTable depths_;
  std::vector<RopePriorSpec> rope_priors_;
  std::map<int, VariableId> buoy_vars_;
  std::map<int, VariableId> shared_rope_vars_;
  std::vector<int> rope_owner_;
  std::vector<AssociationRecord> log_;
  FrontendCounters counters_;
  VariableId last_pose_{};
};

}  // namespace farmslam
