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
 * @file simulator.hpp
 * @brief Synthetic algae-farm surveys with ground truth.
 *
 * The farm is a set of parallel ropes along +x, moored by one buoy at each
 * end. The vehicle flies a lawnmower pattern of straight passes parallel to
 * the ropes joined by semicircular turns beyond the rope ends. Every path
 * segment is flown in a whole number of pose periods, so pose samples fall
 * exactly on segment boundaries and on the rope ends.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "farmslam/association.hpp"
#include "farmslam/core_types.hpp"
#include "farmslam/motion_model.hpp"
#include "farmslam/sss_geometry.hpp"
#include "farmslam/survey.hpp"

namespace farmslam
{

struct FarmLayout
{
  int rope_count = 3;
  double rope_length = 26.0;
  double rope_spacing = 13.0;
  double rope_depth = 1.5;
  double buoy_depth = 0.0;
  double buoy_sigma = 0.5;
};

/// Rope i runs from buoy 2i at (0, i * spacing) to buoy 2i+1 at (length, i * spacing).
inline FarmModel default_farm(const FarmLayout & layout = {})
{
  if (layout.rope_count < 1 || !(layout.rope_length > 0.0) || !(layout.buoy_sigma > 0.0)) {
    throw InvalidArgument("farm layout needs at least one rope, positive length and buoy sigma");
  }
  FarmModel farm;
  farm.buoy_depth = layout.buoy_depth;
  const Eigen::Matrix2d cov = layout.buoy_sigma * layout.buoy_sigma * Eigen::Matrix2d::Identity();
  for (int i = 0; i < layout.rope_count; ++i) {
    const double y = i * layout.rope_spacing;
    farm.buoys.push_back({2 * i, {{0.0, y}, cov}});
    farm.buoys.push_back({2 * i + 1, {{layout.rope_length, y}, cov}});
    farm.ropes.push_back({i, 2 * i, 2 * i + 1, layout.rope_depth});
  }
  return farm;
}

struct SurveyPlan
{
  /// Lateral (y) position of each pass in the farm frame, flown in order.
  std::vector<double> swath_offsets{-2.0, 11.0, 15.0, 24.0, 28.0};
  double speed = 0.65;
  /// Detector output rate; must be an integer multiple of pose_rate.
  double ping_rate = 1.0;
  double pose_rate = 1.0;
  /// Straight run beyond each rope end before turning.
  double run_in = 13.0;
  double vehicle_depth = 0.0;

  // Sonar
  double max_range = 15.0;
  double abeam_tolerance = deg2rad(3.0);
  /// Smallest angle between the ping plane and a rope that still yields a return.
  double min_incidence = deg2rad(30.0);

  // Rope shape: sinusoidal lateral displacement, one period per rope length.
  double undulation_amplitude = 0.3;

  void validate() const
  {
    if (swath_offsets.empty()) {
      throw InvalidArgument("survey plan needs at least one swath");
    }
    for (std::size_t i = 1; i < swath_offsets.size(); ++i) {
      if (swath_offsets[i] == swath_offsets[i - 1]) {
        throw InvalidArgument("consecutive swaths must have distinct offsets");
      }
    }
    if (!(speed > 0.0) || !(pose_rate > 0.0) || !(ping_rate >= pose_rate)) {
      throw InvalidArgument("survey plan needs speed > 0 and ping_rate >= pose_rate > 0");
    }
    const double ratio = ping_rate / pose_rate;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
      throw InvalidArgument("ping_rate must be an integer multiple of pose_rate");
    }
    if (!(max_range > 0.0) || abeam_tolerance < 0.0 || run_in < 0.0 || undulation_amplitude < 0.0) {
      throw InvalidArgument("survey plan sonar parameters out of range");
    }
  }
};

struct NoiseSpec
{
  std::array<double, 3> odom_sigma{0.02, 0.01, deg2rad(0.2)};
  /// Per-step drift added to every delta and absent from its covariance.
  std::array<double, 3> odom_bias{0.0, 0.0, deg2rad(0.05)};
  /// Stand-in sigma for the attached covariance when a sigma is zero.
  double odom_sigma_floor = 1e-3;
  double range_sigma = 0.1;
  double rope_detection_prob = 0.9;
  double buoy_detection_prob = 0.8;
  std::uint64_t seed = 1;

  static NoiseSpec zero()
  {
    NoiseSpec n;
    n.odom_sigma = {0.0, 0.0, 0.0};
    n.odom_bias = {0.0, 0.0, 0.0};
    n.range_sigma = 0.0;
    n.rope_detection_prob = 1.0;
    n.buoy_detection_prob = 1.0;
    return n;
  }

  void validate() const
  {
    for (int i = 0; i < 3; ++i) {
      if (!(odom_sigma[i] >= 0.0) || !std::isfinite(odom_bias[i])) {
        throw InvalidArgument("odometry sigmas must be >= 0 and biases finite");
      }
    }
    if (!(odom_sigma_floor > 0.0) || !(range_sigma >= 0.0)) {
      throw InvalidArgument("noise sigmas out of range");
    }
    for (double p : {rope_detection_prob, buoy_detection_prob}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("detection probabilities must lie in [0, 1]");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Trajectory

/// Continuous lawnmower path, parameterised by time.
class SurveyPath
{
public:
  SurveyPath(const FarmModel & farm, const SurveyPlan & plan)
  : dt_(1.0 / plan.pose_rate)
  {
    plan.validate();
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    for (const auto & b : farm.buoys) {
      xmin = std::min(xmin, b.prior.mean.x);
      xmax = std::max(xmax, b.prior.mean.x);
    }
    const double x0 = xmin - plan.run_in;
    const double x1 = xmax + plan.run_in;
    for (std::size_t k = 0; k < plan.swath_offsets.size(); ++k) {
      const double y = plan.swath_offsets[k];
      const bool forward = k % 2 == 0;
      Segment leg;
      leg.straight = true;
      leg.start = forward ? Pose2(x0, y, 0.0) : Pose2(x1, y, kPi);
      leg.length = x1 - x0;
      push(leg, plan.speed);
      if (k + 1 < plan.swath_offsets.size()) {
        const double dy = plan.swath_offsets[k + 1] - y;
        Segment turn;
        turn.straight = false;
        turn.start = forward ? Pose2(x1, y, 0.0) : Pose2(x0, y, kPi);
        turn.radius = 0.5 * std::abs(dy);
        // Turn left (CCW) when the next pass lies on the port side; cos(theta)
        // is the y component of the left normal.
        turn.sense = (dy * std::cos(turn.start.theta) > 0.0) ? 1.0 : -1.0;
        turn.length = kPi * turn.radius;
        push(turn, plan.speed);
      }
    }
  }

  double duration() const { return segments_.empty() ? 0.0 : segments_.back().t1; }
  double length() const
  {
    double l = 0.0;
    for (const auto & s : segments_) {
      l += s.length;
    }
    return l;
  }
  double pose_period() const { return dt_; }
  std::size_t num_pose_samples() const { return total_steps_ + 1; }
  std::size_t num_segments() const { return segments_.size(); }

  Pose2 pose_at(double t) const
  {
    t = std::clamp(t, 0.0, duration());
    auto it = std::find_if(segments_.begin(), segments_.end(),
        [t](const Segment & s) { return t <= s.t1; });
    if (it == segments_.end()) {
      it = std::prev(segments_.end());
    }
    const Segment & s = *it;
    const double u = (s.t1 > s.t0) ? (t - s.t0) / (s.t1 - s.t0) : 0.0;
    const double d = u * s.length;
    if (s.straight) {
      return {s.start.x + d * std::cos(s.start.theta), s.start.y + d * std::sin(s.start.theta),
        s.start.theta};
    }
    // Centre lies on the turn side of the start pose.
    const double nx = -std::sin(s.start.theta) * s.sense;
    const double ny = std::cos(s.start.theta) * s.sense;
    const double cx = s.start.x + s.radius * nx;
    const double cy = s.start.y + s.radius * ny;
    const double phi0 = std::atan2(s.start.y - cy, s.start.x - cx);
    const double phi = phi0 + s.sense * (d / s.radius);
    return {cx + s.radius * std::cos(phi), cy + s.radius * std::sin(phi),
      phi + s.sense * kPi / 2.0};
  }

private:
  struct Segment
  {
    bool straight = true;
    Pose2 start;
    double length = 0.0;
    double radius = 0.0;
    double sense = 1.0;
    double t0 = 0.0;
    double t1 = 0.0;
  };

  void push(Segment s, double speed)
  {
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(s.length / (speed * dt_))));
    s.t0 = static_cast<double>(total_steps_) * dt_;
    total_steps_ += steps;
    s.t1 = static_cast<double>(total_steps_) * dt_;
    segments_.push_back(s);
  }

  double dt_;
  std::size_t total_steps_ = 0;
  std::vector<Segment> segments_;
};

/// Ground-truth states at every pose sample of the plan.
inline std::vector<DrState> generate_truth(const FarmModel & farm, const SurveyPlan & plan)
{
  const SurveyPath path(farm, plan);
  std::vector<DrState> out;
  out.reserve(path.num_pose_samples());
  for (std::size_t k = 0; k < path.num_pose_samples(); ++k) {
    const double t = static_cast<double>(k) * path.pose_period();
    out.push_back({path.pose_at(t), t});
  }
  return out;
}

/// Travelled distance along a sampled trajectory.
inline double path_length(std::span<const DrState> states)
{
  double l = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) {
    l += distance(states[i].pose.translation(), states[i - 1].pose.translation());
  }
  return l;
}

// ---------------------------------------------------------------------------
// Odometry

/// True relative motion plus per-step bias and Gaussian noise. The attached
/// covariance models only the random part.
inline std::vector<OdometryDelta> corrupt_odometry(
  std::span<const DrState> truth, const NoiseSpec & noise, std::mt19937_64 & rng)
{
  noise.validate();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d var;
  for (int i = 0; i < 3; ++i) {
    const double s = noise.odom_sigma[i] > 0.0 ? noise.odom_sigma[i] : noise.odom_sigma_floor;
    var[i] = s * s;
  }
  std::vector<OdometryDelta> out;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    const Pose2 rel = between(truth[i - 1].pose, truth[i].pose);
    OdometryDelta d;
    const double n0 = gauss(rng);
    const double n1 = gauss(rng);
    const double n2 = gauss(rng);
    d.dx = rel.x + noise.odom_bias[0] + noise.odom_sigma[0] * n0;
    d.dy = rel.y + noise.odom_bias[1] + noise.odom_sigma[1] * n1;
    d.dtheta = wrap_angle(rel.theta + noise.odom_bias[2] + noise.odom_sigma[2] * n2);
    d.cov = var.asDiagonal();
    out.push_back(d);
  }
  return out;
}

inline std::vector<OdometryDelta> corrupt_odometry(std::span<const DrState> truth, const NoiseSpec & noise)
{
  std::mt19937_64 rng(noise.seed);
  return corrupt_odometry(truth, noise, rng);
}

// ---------------------------------------------------------------------------
// Detections

/// True rope shape as a polyline, including the lateral undulation.
inline std::vector<Point2> rope_polyline(const FarmModel & farm, const Rope & rope, double amplitude,
  double spacing = 0.1)
{
  const Point2 a = farm.find_buoy(rope.buoy_a)->prior.mean;
  const Point2 b = farm.find_buoy(rope.buoy_b)->prior.mean;
  const double len = distance(a, b);
  const Eigen::Vector2d dir = (b - a).vec() / len;
  const Eigen::Vector2d nrm(-dir.y(), dir.x());
  const double sign = rope.id % 2 == 0 ? 1.0 : -1.0;
  const auto n = static_cast<int>(std::max(1.0, std::ceil(len / spacing)));
  std::vector<Point2> pts;
  for (int i = 0; i <= n; ++i) {
    const double s = len * i / n;
    const double off = sign * amplitude * std::sin(2.0 * kPi * s / len);
    pts.push_back(Point2::from(a.vec() + s * dir + off * nrm));
  }
  return pts;
}

namespace detail
{

/// Distance along the ray to the first crossing of the polyline, with the
/// sine of the crossing angle.
inline std::optional<std::pair<double, double>> ray_polyline(
  Point2 origin, const Eigen::Vector2d & dir, std::span<const Point2> poly)
{
  std::optional<std::pair<double, double>> best;
  for (std::size_t i = 1; i < poly.size(); ++i) {
    const Eigen::Vector2d p = poly[i - 1].vec();
    const Eigen::Vector2d e = poly[i].vec() - p;
    const double denom = dir.x() * e.y() - dir.y() * e.x();
    if (std::abs(denom) < 1e-12) {
      continue;
    }
    const Eigen::Vector2d w = p - origin.vec();
    const double s = (w.x() * e.y() - w.y() * e.x()) / denom;
    const double u = (w.x() * dir.y() - w.y() * dir.x()) / denom;
    if (s > 0.0 && u >= 0.0 && u <= 1.0 && (!best || s < best->first)) {
      best = std::make_pair(s, std::abs(denom) / e.norm());
    }
  }
  return best;
}

}  // namespace detail

/// Per-ping detections along @p path. Each channel reports the first rope its
/// ping plane crosses and every buoy lying within the abeam tolerance.
inline std::vector<Detection> simulate_detections(const SurveyPath & path, const FarmModel & farm,
  const SurveyPlan & plan, const NoiseSpec & noise, std::mt19937_64 & rng)
{
  noise.validate();
  std::vector<std::vector<Point2>> ropes;
  for (const auto & r : farm.ropes) {
    ropes.push_back(rope_polyline(farm, r, plan.undulation_amplitude));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double sin_min_incidence = std::sin(plan.min_incidence);

  auto emit = [&](std::vector<Detection> & out, double t, Channel ch, TargetClass k, double ground,
    double target_depth, double prob) {
      const double dz = plan.vehicle_depth - target_depth;
      const double slant = std::sqrt(ground * ground + dz * dz) + noise.range_sigma * gauss(rng);
      const bool keep = unif(rng) < prob;
      if (keep && slant > 0.0 && slant >= std::abs(dz) && slant <= plan.max_range) {
        out.push_back({t, ch, k, slant, plan.vehicle_depth});
      }
    };

  std::vector<Detection> out;
  const auto pings = static_cast<std::size_t>(std::llround(path.duration() * plan.ping_rate));
  for (std::size_t j = 0; j <= pings; ++j) {
    const double t = static_cast<double>(j) / plan.ping_rate;
    const Pose2 pose = path.pose_at(t);
    for (Channel ch : {Channel::port, Channel::starboard}) {
      const double beam = pose.theta + channel_bearing(ch);
      const Eigen::Vector2d dir(std::cos(beam), std::sin(beam));

      std::optional<std::pair<double, double>> nearest;
      std::size_t nearest_rope = 0;
      for (std::size_t r = 0; r < ropes.size(); ++r) {
        const auto hit = detail::ray_polyline(pose.translation(), dir, ropes[r]);
        if (hit && (!nearest || hit->first < nearest->first)) {
          nearest = hit;
          nearest_rope = r;
        }
      }
      if (nearest && nearest->second >= sin_min_incidence) {
        emit(out, t, ch, TargetClass::rope, nearest->first, farm.ropes[nearest_rope].depth,
          noise.rope_detection_prob);
      }

      for (const auto & b : farm.buoys) {
        const Point2 rel = transform_to(pose, b.prior.mean);
        const double ground = norm(rel);
        if (ground < 1e-9) {
          continue;
        }
        const double bearing = std::atan2(rel.y, rel.x);
        if (std::abs(wrap_angle(bearing - channel_bearing(ch))) <= plan.abeam_tolerance) {
          emit(out, t, ch, TargetClass::buoy, ground, farm.buoy_depth, noise.buoy_detection_prob);
        }
      }
    }
  }
  return out;
}

inline std::vector<Detection> simulate_detections(const SurveyPath & path, const FarmModel & farm,
  const SurveyPlan & plan, const NoiseSpec & noise)
{
  std::mt19937_64 rng(noise.seed ^ 0x9E3779B97F4A7C15ULL);
  return simulate_detections(path, farm, plan, noise, rng);
}

/// Full synthetic dataset: odometry at the pose rate, detections at the ping
/// rate, ground truth at every pose sample.
inline SurveyDataset simulate_survey(const FarmModel & farm, const SurveyPlan & plan, const NoiseSpec & noise)
{
  farm.validate();
  plan.validate();
  noise.validate();
  const SurveyPath path(farm, plan);
  const auto truth = generate_truth(farm, plan);
  const auto odom = corrupt_odometry(truth, noise);
  const auto dets = simulate_detections(path, farm, plan, noise);

  SurveyDataset ds;
  ds.farm = farm;
  ds.initial_pose = truth.front().pose;
  ds.start_time = truth.front().t;
  ds.seed = noise.seed;
  ds.ground_truth = truth;
  std::size_t d = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (k > 0) {
      ds.events.emplace_back(OdometryEvent{truth[k].t, odom[k - 1]});
    }
    const double next_t = k + 1 < truth.size() ? truth[k + 1].t : std::numeric_limits<double>::infinity();
    // Pose and ping clocks share a period multiple; compare with a tolerance.
    while (d < dets.size() && dets[d].t < next_t - 1e-9) {
      auto det = dets[d++];
      det.t = std::max(det.t, truth[k].t);
      ds.events.emplace_back(det);
    }
  }
  return ds;
}

}  // namespace farmslam
