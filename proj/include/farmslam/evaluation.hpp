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
 * @file evaluation.hpp
 * @brief Map and trajectory metrics: buoy RMSE, rope straightness, online pose error.
 *
 * The online relative pose error (oRPE) compares the estimate of each pose
 * right after the update that created it with the estimate of the same pose
 * in the final solution. It is positional only; heading differences are
 * reported separately.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "farmslam/association.hpp"
#include "farmslam/slam_runner.hpp"
#include "farmslam/survey.hpp"

namespace farmslam
{

/// RMS distance of the final buoy estimates from their priors. Buoy
/// variables are expected in farm order.
inline double buoy_rmse(const Values & final_values, const FarmModel & farm)
{
  if (farm.buoys.empty()) {
    throw MissingBuoy("farm has no buoys");
  }
  if (final_values.buoys.size() < farm.buoys.size()) {
    throw MissingBuoy("final estimate holds " + std::to_string(final_values.buoys.size()) +
      " buoys, farm has " + std::to_string(farm.buoys.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < farm.buoys.size(); ++k) {
    const Point2 d = final_values.buoys[k] - farm.buoys[k].prior.mean;
    sum += d.x * d.x + d.y * d.y;
  }
  return std::sqrt(sum / static_cast<double>(farm.buoys.size()));
}

/// Total-least-squares line through a point set.
struct LineFit
{
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  Eigen::Vector2d normal = Eigen::Vector2d::UnitY();
  /// Signed perpendicular distance of each point.
  std::vector<double> residuals;
};

inline LineFit fit_line_tls(std::span<const Point2> pts)
{
  if (pts.size() < 2) {
    throw InsufficientPoints("line fit needs at least two points");
  }
  LineFit fit;
  for (const auto & p : pts) {
    fit.centroid += p.vec();
  }
  fit.centroid /= static_cast<double>(pts.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto & p : pts) {
    const Eigen::Vector2d d = p.vec() - fit.centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(scatter);
  fit.normal = es.eigenvectors().col(0);  // smallest eigenvalue
  for (const auto & p : pts) {
    fit.residuals.push_back(fit.normal.dot(p.vec() - fit.centroid));
  }
  return fit;
}

struct RopeFitResult
{
  double rmse = 0.0;
  std::size_t points = 0;
  /// Ropes with fewer than two points, left out of the pooled RMSE.
  std::vector<int> skipped;
};

/// Pooled RMSE of perpendicular residuals of a separate line fit per rope.
inline RopeFitResult rope_line_rmse(const std::map<int, std::vector<Point2>> & per_rope)
{
  RopeFitResult out;
  double sum = 0.0;
  for (const auto & [rope, pts] : per_rope) {
    if (pts.size() < 2) {
      out.skipped.push_back(rope);
      continue;
    }
    for (double r : fit_line_tls(pts).residuals) {
      sum += r * r;
    }
    out.points += pts.size();
  }
  if (out.points == 0) {
    throw InsufficientPoints("no rope has two or more points");
  }
  out.rmse = std::sqrt(sum / static_cast<double>(out.points));
  return out;
}

/// Final rope positions grouped by physical rope. With one landmark per
/// detection those are the landmarks themselves; otherwise each feasible
/// rope detection is projected through its final pose and attributed to the
/// rope the front-end (or, for discarded detections, the final pose) picks.
inline std::map<int, std::vector<Point2>> final_rope_points(
  const RunRecord & run, const FarmModel & farm, const FrontendConfig & config = {})
{
  std::map<int, std::vector<Point2>> out;
  const auto & values = run.final_estimate.values;
  if (run.method == MethodKind::proposed) {
    for (std::size_t i = 0; i < run.rope_owner.size() && i < values.ropes.size(); ++i) {
      out[run.rope_owner[i]].push_back(values.ropes[i]);
    }
    return out;
  }
  std::vector<RopePriorSpec> priors;
  for (const auto & r : farm.ropes) {
    priors.push_back(make_rope_prior(farm, r.id, config.rope_sigma_along, config.rope_sigma_across));
  }
  for (const auto & a : run.associations) {
    if (a.klass != TargetClass::rope || a.infeasible || a.pose_index >= values.poses.size()) {
      continue;
    }
    RangeBearing meas;
    meas.range = a.range;
    meas.bearing = a.bearing;
    const Pose2 & pose = values.poses[a.pose_index];
    int rope = a.target_id;
    if (rope < 0) {
      rope = associate_rope(meas, pose, priors).rope_id;
    }
    out[rope].push_back(landmark_from_measurement(pose, meas));
  }
  return out;
}

struct OrpeResult
{
  /// (t, positional error in metres) per snapshot.
  std::vector<std::pair<double, double>> series;
  double rmse = 0.0;
  /// RMS of the wrapped heading difference, in radians.
  double heading_rmse = 0.0;
};

inline OrpeResult orpe(const RunRecord & run)
{
  OrpeResult out;
  const auto & poses = run.final_estimate.values.poses;
  double sum = 0.0;
  double hsum = 0.0;
  for (const auto & s : run.snapshots) {
    if (s.pose_index >= poses.size()) {
      throw MissingPose("snapshot pose " + std::to_string(s.pose_index) + " is not in the final estimate");
    }
    const Pose2 & f = poses[s.pose_index];
    const double e = std::hypot(s.pose.x - f.x, s.pose.y - f.y);
    const double h = wrap_angle(s.pose.theta - f.theta);
    out.series.emplace_back(s.t, e);
    sum += e * e;
    hsum += h * h;
  }
  if (!run.snapshots.empty()) {
    out.rmse = std::sqrt(sum / static_cast<double>(run.snapshots.size()));
    out.heading_rmse = std::sqrt(hsum / static_cast<double>(run.snapshots.size()));
  }
  return out;
}

/// Final trajectory error against ground truth sampled at the pose times.
inline std::optional<double> truth_rmse(const RunRecord & run, const SurveyDataset & ds)
{
  if (!ds.ground_truth || ds.ground_truth->size() < run.final_estimate.values.poses.size()) {
    return std::nullopt;
  }
  const auto & poses = run.final_estimate.values.poses;
  if (poses.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto & g = (*ds.ground_truth)[i].pose;
    sum += std::pow(g.x - poses[i].x, 2) + std::pow(g.y - poses[i].y, 2);
  }
  return std::sqrt(sum / static_cast<double>(poses.size()));
}

struct MetricsReport
{
  MethodKind method = MethodKind::proposed;
  std::optional<double> rope_rmse;
  double buoy_rmse = 0.0;
  double orpe_rmse = 0.0;
  double orpe_heading_rmse = 0.0;
  std::vector<std::pair<double, double>> orpe_series;
  double max_update_time = 0.0;
  double total_time = 0.0;
  std::size_t factor_count = 0;
  std::optional<double> truth_rmse;
};

inline MetricsReport compute_metrics(
  const RunRecord & run, const SurveyDataset & ds, const FrontendConfig & config = {})
{
  MetricsReport m;
  m.method = run.method;
  m.buoy_rmse = buoy_rmse(run.final_estimate.values, ds.farm);
  try {
    m.rope_rmse = rope_line_rmse(final_rope_points(run, ds.farm, config)).rmse;
  } catch (const InsufficientPoints &) {
    m.rope_rmse.reset();
  }
  const auto o = orpe(run);
  m.orpe_rmse = o.rmse;
  m.orpe_heading_rmse = o.heading_rmse;
  m.orpe_series = o.series;
  m.max_update_time = run.max_update_seconds;
  m.total_time = run.total_solver_seconds;
  m.factor_count = run.factor_count;
  m.truth_rmse = truth_rmse(run, ds);
  return m;
}

// ---------------------------------------------------------------------------
// Comparison tables

struct Stat
{
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Sample mean and (n - 1) standard deviation.
inline Stat summarize(std::span<const double> xs)
{
  Stat s;
  s.n = xs.size();
  if (xs.empty()) {
    return s;
  }
  for (double x : xs) {
    s.mean += x;
  }
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) {
      ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct ComparisonRow
{
  MethodKind method = MethodKind::proposed;
  Stat rope;
  Stat buoy;
  Stat orpe;
  Stat max_update;
  Stat factors;
};

struct ComparisonTable
{
  std::vector<ComparisonRow> rows;

  const ComparisonRow * find(MethodKind m) const
  {
    auto it = std::find_if(rows.begin(), rows.end(), [m](const auto & r) { return r.method == m; });
    return it == rows.end() ? nullptr : &*it;
  }

  /// RMSE table; a +- column block is added when any row aggregates several runs.
  std::string render() const
  {
    const bool agg = std::any_of(rows.begin(), rows.end(), [](const auto & r) { return r.orpe.n > 1; });
    auto cell = [agg](const Stat & s) {
      char buf[48];
      if (s.n == 0) {
        std::snprintf(buf, sizeof(buf), agg ? "%13s" : "%6s", "n/a");
      } else if (agg) {
        std::snprintf(buf, sizeof(buf), "%6.2f +- %4.2f", s.mean, s.stddev);
      } else {
        std::snprintf(buf, sizeof(buf), "%6.2f", s.mean);
      }
      return std::string(buf);
    };
    const int w = agg ? 14 : 6;
    std::ostringstream os;
    char head[160];
    std::snprintf(head, sizeof(head), "%-12s| %*s | %*s | %*s\n", "Method", w, "Rope", w, "Buoy", w, "oRPE");
    os << "RMSE (m)\n" << head;
    os << std::string(12, '-') << '+' << std::string(w + 2, '-') << '+' << std::string(w + 2, '-') << '+'
       << std::string(w + 1, '-') << '\n';
    for (const auto & r : rows) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-12s| %*s | %*s | %*s\n",
        std::string(display_name(r.method)).c_str(), w, cell(r.rope).c_str(), w,
        cell(r.buoy).c_str(), w, cell(r.orpe).c_str());
      os << line;
    }
    return os.str();
  }
};

/// One row per method; several reports of the same method are aggregated.
inline ComparisonTable compare_methods(const std::multimap<MethodKind, MetricsReport> & reports)
{
  ComparisonTable table;
  for (MethodKind m : kAllMethods) {
    auto [lo, hi] = reports.equal_range(m);
    if (lo == hi) {
      continue;
    }
    std::vector<double> rope, buoy, orp, upd, fac;
    for (auto it = lo; it != hi; ++it) {
      const auto & r = it->second;
      if (r.rope_rmse) {
        rope.push_back(*r.rope_rmse);
      }
      buoy.push_back(r.buoy_rmse);
      orp.push_back(r.orpe_rmse);
      upd.push_back(r.max_update_time);
      fac.push_back(static_cast<double>(r.factor_count));
    }
    table.rows.push_back({m, summarize(rope), summarize(buoy), summarize(orp), summarize(upd), summarize(fac)});
  }
  return table;
}

inline ComparisonTable compare_methods(const std::map<MethodKind, MetricsReport> & reports)
{
  return compare_methods(std::multimap<MethodKind, MetricsReport>(reports.begin(), reports.end()));
}

}  // namespace farmslam
