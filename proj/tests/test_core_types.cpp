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

#include <gtest/gtest.h>

#include <random>

#include "farmslam/core_types.hpp"
#include "farmslam/errors.hpp"

using namespace farmslam;

namespace
{

// Independent planar rigid-body algebra.
struct RefPose
{
  double x, y, t;
};

RefPose ref_compose(RefPose a, RefPose b)
{
  return {a.x + std::cos(a.t) * b.x - std::sin(a.t) * b.y, a.y + std::sin(a.t) * b.x + std::cos(a.t) * b.y,
    std::atan2(std::sin(a.t + b.t), std::cos(a.t + b.t))};
}

RefPose ref_inverse(RefPose a)
{
  return {-std::cos(a.t) * a.x - std::sin(a.t) * a.y, std::sin(a.t) * a.x - std::cos(a.t) * a.y, -a.t};
}

double angle_diff(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * M_PI)); }

void expect_pose_near(const Pose2 & a, const Pose2 & b, double tol)
{
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_LE(angle_diff(a.theta, b.theta), tol);
}

}  // namespace

TEST(WrapAngle, Examples)
{
  EXPECT_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(3.0 * M_PI / 2.0), -M_PI / 2.0, 1e-15);
  EXPECT_EQ(wrap_angle(-M_PI), M_PI);
  EXPECT_EQ(wrap_angle(M_PI), M_PI);
}

TEST(WrapAngle, RejectsNonFinite)
{
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
  EXPECT_THROW(wrap_angle(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(WrapAngle, RangeCongruenceAndIdempotence)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -M_PI);
    EXPECT_LE(w, M_PI);
    const double k = (a - w) / (2.0 * M_PI);
    EXPECT_NEAR(k, std::round(k), 1e-12);
    EXPECT_EQ(wrap_angle(w), w);
  }
}

TEST(Pose2, ConstructorWraps)
{
  const Pose2 p(1.0, 2.0, 3.0 * M_PI);
  EXPECT_NEAR(p.theta, M_PI, 1e-15);
  EXPECT_EQ(Pose2(0.0, 0.0, -M_PI).theta, M_PI);
}

TEST(Compose, Examples)
{
  const Pose2 p(1.5, -2.0, 0.3);
  expect_pose_near(compose(Pose2::identity(), p), p, 0.0);
  expect_pose_near(compose(Pose2(1.0, 0.0, M_PI / 2.0), Pose2(1.0, 0.0, 0.0)), Pose2(1.0, 1.0, M_PI / 2.0), 1e-15);
}

TEST(Between, Examples)
{
  const Pose2 p(3.0, 4.0, -2.0);
  expect_pose_near(between(p, p), Pose2::identity(), 1e-15);
  expect_pose_near(between(Pose2(0, 0, 0), Pose2(2, 0, 0)), Pose2(2, 0, 0), 0.0);
}

TEST(Compose, MatchesReferenceAlgebra)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const RefPose a{u(rng), u(rng), u(rng)};
    const RefPose b{u(rng), u(rng), u(rng)};
    const RefPose c = ref_compose(a, b);
    expect_pose_near(compose(Pose2(a.x, a.y, a.t), Pose2(b.x, b.y, b.t)), Pose2(c.x, c.y, c.t), 1e-12);
    const RefPose d = ref_compose(ref_inverse(a), b);
    expect_pose_near(between(Pose2(a.x, a.y, a.t), Pose2(b.x, b.y, b.t)), Pose2(d.x, d.y, d.t), 1e-12);
  }
}

TEST(Compose, RoundTripAndAssociativity)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const Pose2 a(u(rng), u(rng), u(rng));
    const Pose2 b(u(rng), u(rng), u(rng));
    const Pose2 c(u(rng), u(rng), u(rng));
    expect_pose_near(compose(a, between(a, b)), b, 1e-12);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-12);
  }
}

TEST(Transform, ToAndFromAreInverse)
{
  const Pose2 p(2.0, -1.0, 0.7);
  const Point2 body{3.0, 4.0};
  const Point2 back = transform_to(p, transform_from(p, body));
  EXPECT_NEAR(back.x, body.x, 1e-12);
  EXPECT_NEAR(back.y, body.y, 1e-12);
}

TEST(IsSpd, Cases)
{
  EXPECT_TRUE(is_spd(Eigen::Matrix2d::Identity().eval()));
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_FALSE(is_spd(asym));
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_FALSE(is_spd(indefinite));
  EXPECT_FALSE(is_spd(Eigen::Matrix3d::Zero().eval()));
}
