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

#include "farmslam/errors.hpp"
#include "farmslam/sss_geometry.hpp"

using namespace farmslam;

namespace
{

const Eigen::Matrix2d kNoise = Eigen::Vector2d(0.04, 0.0025).asDiagonal();

Detection det(Channel c, TargetClass k, double slant, double depth)
{
  Detection d;
  d.channel = c;
  d.klass = k;
  d.slant_range = slant;
  d.vehicle_depth = depth;
  return d;
}

}  // namespace

TEST(ProjectSlant, Examples)
{
  EXPECT_EQ(project_slant_to_ground(2.5, 0.0, 1.5), 2.0);
  for (double d : {0.1, 1.0, 7.25, 40.0}) {
    EXPECT_EQ(project_slant_to_ground(d, 0.8, 0.8), d);
  }
  EXPECT_THROW(project_slant_to_ground(1.0, 0.0, 1.5), InfeasibleGeometry);
}

TEST(ProjectSlant, RejectsNonPositiveSlant)
{
  EXPECT_THROW(project_slant_to_ground(0.0, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(project_slant_to_ground(-1.0, 0.0, 0.0), InvalidArgument);
}

TEST(ProjectSlant, RangeProperty)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.01, 30.0);
  std::uniform_real_distribution<double> z(0.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const double slant = s(rng);
    const double zv = z(rng);
    const double zt = z(rng);
    if (slant < std::abs(zv - zt)) {
      EXPECT_THROW(project_slant_to_ground(slant, zv, zt), InfeasibleGeometry);
      continue;
    }
    const double g = project_slant_to_ground(slant, zv, zt);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, slant);
    EXPECT_NEAR(g * g + (zv - zt) * (zv - zt), slant * slant, 1e-9);
  }
}

TEST(DetectionToMeasurement, Examples)
{
  const TargetDepthTable depths;
  auto m = detection_to_measurement(det(Channel::starboard, TargetClass::rope, 2.5, 0.0), depths, kNoise);
  EXPECT_EQ(m.range, 2.0);
  EXPECT_EQ(m.bearing, -M_PI / 2.0);
  EXPECT_EQ(m.cov, kNoise);

  m = detection_to_measurement(det(Channel::port, TargetClass::buoy, 3.0, 0.0), depths, kNoise);
  EXPECT_EQ(m.range, 3.0);
  EXPECT_EQ(m.bearing, M_PI / 2.0);

  m = detection_to_measurement(det(Channel::port, TargetClass::rope, 4.0, 0.5), depths, kNoise);
  EXPECT_NEAR(m.range, std::sqrt(15.0), 1e-15);
  EXPECT_EQ(m.bearing, M_PI / 2.0);
}

TEST(DetectionToMeasurement, InfeasiblePropagates)
{
  EXPECT_THROW(detection_to_measurement(det(Channel::port, TargetClass::rope, 1.0, 0.0), {}, kNoise),
    InfeasibleGeometry);
}

TEST(DetectionToMeasurement, BroadsideOnly)
{
  for (auto c : {Channel::port, Channel::starboard}) {
    for (auto k : {TargetClass::buoy, TargetClass::rope}) {
      const auto m = detection_to_measurement(det(c, k, 5.0, 0.3), {}, kNoise);
      EXPECT_EQ(std::abs(m.bearing), M_PI / 2.0);
    }
  }
}

TEST(PredictRangeBearing, Examples)
{
  auto p = predict_range_bearing(Pose2(0, 0, 0), {0, -3});
  EXPECT_EQ(p.range, 3.0);
  EXPECT_EQ(p.bearing, -M_PI / 2.0);
  p = predict_range_bearing(Pose2(1, 1, M_PI / 2.0), {-2, 1});
  EXPECT_EQ(p.range, 3.0);
  EXPECT_EQ(p.bearing, M_PI / 2.0);
}

TEST(PredictRangeBearing, Degenerate)
{
  EXPECT_THROW(predict_range_bearing(Pose2(1, 2, 0.3), {1, 2}), DegenerateRange);
  EXPECT_THROW(predict_range_bearing(Pose2(1, 2, 0.3), {1 + 1e-10, 2}), DegenerateRange);
}

TEST(PredictRangeBearing, MatchesTrigonometry)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> a(-M_PI, M_PI);
  for (int i = 0; i < 10000; ++i) {
    const Pose2 pose(u(rng), u(rng), a(rng));
    const Point2 l{u(rng), u(rng)};
    const double dx = l.x - pose.x;
    const double dy = l.y - pose.y;
    // Bearing from the body-frame components.
    const double bx = std::cos(pose.theta) * dx + std::sin(pose.theta) * dy;
    const double by = -std::sin(pose.theta) * dx + std::cos(pose.theta) * dy;
    const auto p = predict_range_bearing(pose, l);
    EXPECT_NEAR(p.range, std::sqrt(dx * dx + dy * dy), 1e-12);
    EXPECT_NEAR(std::remainder(p.bearing - std::atan2(by, bx), 2 * M_PI), 0.0, 1e-12);
  }
}

TEST(LandmarkFromMeasurement, Examples)
{
  auto l = landmark_from_measurement(Pose2(0, 0, 0), {3.0, -M_PI / 2.0, kNoise});
  EXPECT_NEAR(l.x, 0.0, 1e-15);
  EXPECT_EQ(l.y, -3.0);
  l = landmark_from_measurement(Pose2(5, 5, M_PI), {2.0, 0.0, kNoise});
  EXPECT_EQ(l.x, 3.0);
  EXPECT_EQ(l.y, 5.0);
}

TEST(LandmarkFromMeasurement, InvertsPrediction)
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> a(-M_PI, M_PI);
  std::uniform_real_distribution<double> r(0.05, 30.0);
  for (int i = 0; i < 10000; ++i) {
    const Pose2 pose(u(rng), u(rng), a(rng));
    const RangeBearing m{r(rng), a(rng), kNoise};
    const auto p = predict_range_bearing(pose, landmark_from_measurement(pose, m));
    EXPECT_NEAR(p.range, m.range, 1e-9);
    EXPECT_NEAR(std::remainder(p.bearing - m.bearing, 2 * M_PI), 0.0, 1e-9);
  }
}
