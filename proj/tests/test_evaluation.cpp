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

#include <cmath>
#include <random>

#include "farmslam/evaluation.hpp"
#include "farmslam/simulator.hpp"
#include "oracles/tls_search.hpp"

using namespace farmslam;

namespace
{

Values buoys_at_priors(const FarmModel & farm)
{
  Values v;
  for (const auto & b : farm.buoys) {
    v.buoys.push_back(b.prior.mean);
  }
  return v;
}

MetricsReport report(MethodKind m, double rope, double buoy, double orpe_rmse)
{
  MetricsReport r;
  r.method = m;
  r.rope_rmse = rope;
  r.buoy_rmse = buoy;
  r.orpe_rmse = orpe_rmse;
  return r;
}

RunRecord run_with(std::vector<Pose2> finals, std::vector<Snapshot> snaps)
{
  RunRecord r;
  r.final_estimate.values.poses = std::move(finals);
  r.snapshots = std::move(snaps);
  return r;
}

}  // namespace

TEST(BuoyRmse, Examples)
{
  const auto farm = default_farm();
  auto v = buoys_at_priors(farm);
  EXPECT_EQ(buoy_rmse(v, farm), 0.0);
  v.buoys[3].x += 2.0;
  EXPECT_NEAR(buoy_rmse(v, farm), std::sqrt(4.0 / 6.0), 1e-15);
}

TEST(BuoyRmse, MatchesDirectSum)
{
  const auto farm = default_farm();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto v = buoys_at_priors(farm);
    double ss = 0.0;
    for (auto & b : v.buoys) {
      const double dx = n(rng);
      const double dy = n(rng);
      b.x += dx;
      b.y += dy;
      ss += dx * dx + dy * dy;
    }
    EXPECT_NEAR(buoy_rmse(v, farm), std::sqrt(ss / 6.0), 1e-12);
  }
}

TEST(BuoyRmse, Errors)
{
  const auto farm = default_farm();
  Values v;
  v.buoys.resize(5);
  EXPECT_THROW(buoy_rmse(v, farm), MissingBuoy);
  EXPECT_THROW(buoy_rmse(v, FarmModel{}), MissingBuoy);
}

TEST(LineFit, CollinearIsZero)
{
  std::map<int, std::vector<Point2>> pts;
  for (int i = 0; i < 10; ++i) {
    pts[0].push_back({1.0 + 0.5 * i, 2.0 - 0.25 * i});
    pts[1].push_back({3.0, 1.0 * i});
  }
  const auto r = rope_line_rmse(pts);
  EXPECT_NEAR(r.rmse, 0.0, 1e-12);
  EXPECT_EQ(r.points, 20u);
}

TEST(LineFit, AlternatingOffsets)
{
  const double d = 0.3;
  std::map<int, std::vector<Point2>> pts;
  for (int i = 0; i < 10; ++i) {
    pts[0].push_back({static_cast<double>(i), d});
    pts[0].push_back({static_cast<double>(i), -d});
  }
  EXPECT_NEAR(rope_line_rmse(pts).rmse, d, 1e-12);
}

TEST(LineFit, MatchesAngleSearch)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 20;
    const double ang = 3.0 * u(rng);
    const double spread = 0.05 + 0.5 * (1.0 + u(rng));
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
      const double s = 10.0 * u(rng);
      const double o = spread * u(rng);
      pts.push_back({5.0 + s * std::cos(ang) - o * std::sin(ang), -2.0 + s * std::sin(ang) + o * std::cos(ang)});
    }
    const auto want = oracle::tls_by_search(pts);
    std::map<int, std::vector<Point2>> m{{0, pts}};
    EXPECT_NEAR(rope_line_rmse(m).rmse, want.rmse, 1e-9) << "trial " << trial;
  }
}

TEST(LineFit, RigidMotionInvariant)
{
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) {
      pts.push_back({4.0 * n(rng), 0.3 * n(rng)});
    }
    const Pose2 g(n(rng) * 50.0, n(rng) * 50.0, n(rng));
    std::vector<Point2> moved;
    for (const auto & p : pts) {
      moved.push_back(transform_from(g, p));
    }
    const double a = rope_line_rmse({{0, pts}}).rmse;
    const double b = rope_line_rmse({{0, moved}}).rmse;
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(LineFit, PooledAcrossRopes)
{
  // One rope exact, one rope with residuals of +-1 on four points.
  std::map<int, std::vector<Point2>> pts;
  pts[0] = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  pts[1] = {{0, 1}, {0, -1}, {3, 1}, {3, -1}};
  const auto r = rope_line_rmse(pts);
  EXPECT_EQ(r.points, 8u);
  EXPECT_NEAR(r.rmse, std::sqrt(4.0 / 8.0), 1e-12);
}

TEST(LineFit, InsufficientPoints)
{
  std::map<int, std::vector<Point2>> pts;
  pts[0] = {{0, 0}};
  EXPECT_THROW(rope_line_rmse(pts), InsufficientPoints);
  pts[1] = {{0, 0}, {1, 1}};
  const auto r = rope_line_rmse(pts);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0], 0);
  EXPECT_THROW(fit_line_tls(std::vector<Point2>{}), InsufficientPoints);
}

TEST(Orpe, Examples)
{
  auto run = run_with({Pose2(0, 0, 0), Pose2(1, 1, 0.1)},
    {{0.0, 0, Pose2(0, 0, 0)}, {1.0, 1, Pose2(1, 1, 0.1)}});
  auto o = orpe(run);
  EXPECT_EQ(o.rmse, 0.0);
  EXPECT_EQ(o.heading_rmse, 0.0);
  ASSERT_EQ(o.series.size(), 2u);

  run = run_with({Pose2(0, 0, 0)}, {{2.5, 0, Pose2(3, 4, 0)}});
  o = orpe(run);
  ASSERT_EQ(o.series.size(), 1u);
  EXPECT_EQ(o.series[0].first, 2.5);
  EXPECT_DOUBLE_EQ(o.series[0].second, 5.0);
  EXPECT_DOUBLE_EQ(o.rmse, 5.0);
}

TEST(Orpe, HeadingWraps)
{
  const auto run = run_with({Pose2(0, 0, kPi - 0.05)}, {{0.0, 0, Pose2(0, 0, -kPi + 0.05)}});
  EXPECT_NEAR(orpe(run).heading_rmse, 0.1, 1e-12);
}

TEST(Orpe, MatchesDirectSum)
{
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Pose2> finals;
  std::vector<Snapshot> snaps;
  double ss = 0.0;
  for (int i = 0; i < 40; ++i) {
    finals.emplace_back(n(rng), n(rng), 0.0);
    const double dx = n(rng);
    const double dy = n(rng);
    snaps.push_back({double(i), std::size_t(i), Pose2(finals.back().x + dx, finals.back().y + dy, 0.0)});
    ss += dx * dx + dy * dy;
  }
  EXPECT_NEAR(orpe(run_with(finals, snaps)).rmse, std::sqrt(ss / 40.0), 1e-12);
}

TEST(Orpe, MissingPose)
{
  const auto run = run_with({Pose2()}, {{0.0, 3, Pose2()}});
  EXPECT_THROW(orpe(run), MissingPose);
}

TEST(Summarize, MeanAndSampleStddev)
{
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.stddev, std::sqrt(32.0 / 7.0), 1e-14);
  EXPECT_EQ(s.n, 8u);
  EXPECT_EQ(summarize(std::vector<double>{3.0}).stddev, 0.0);
}

TEST(CompareMethods, GoldenTable)
{
  std::map<MethodKind, MetricsReport> reports;
  reports[MethodKind::proposed] = report(MethodKind::proposed, 1.00, 1.14, 2.04);
  reports[MethodKind::baseline_buoy_only] = report(MethodKind::baseline_buoy_only, 1.23, 1.06, 2.68);
  reports[MethodKind::baseline_shared_rope] = report(MethodKind::baseline_shared_rope, 2.55, 0.95, 5.53);
  const std::string want =
    "RMSE (m)\n"
    "Method      |   Rope |   Buoy |   oRPE\n"
    "------------+--------+--------+-------\n"
    "Baseline 1  |   1.23 |   1.06 |   2.68\n"
    "Baseline 2  |   2.55 |   0.95 |   5.53\n"
    "Proposed    |   1.00 |   1.14 |   2.04\n";
  EXPECT_EQ(compare_methods(reports).render(), want);
}

TEST(CompareMethods, SingleReportAndMissingRope)
{
  std::map<MethodKind, MetricsReport> reports;
  auto r = report(MethodKind::proposed, 0.0, 0.5, 0.25);
  r.rope_rmse.reset();
  reports[MethodKind::proposed] = r;
  const auto table = compare_methods(reports);
  ASSERT_EQ(table.rows.size(), 1u);
  const std::string want =
    "RMSE (m)\n"
    "Method      |   Rope |   Buoy |   oRPE\n"
    "------------+--------+--------+-------\n"
    "Proposed    |    n/a |   0.50 |   0.25\n";
  EXPECT_EQ(table.render(), want);
}

TEST(CompareMethods, AggregatesSeeds)
{
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::multimap<MethodKind, MetricsReport> reports;
  std::map<MethodKind, std::vector<double>> orpes;
  for (int seed = 0; seed < 20; ++seed) {
    for (MethodKind m : kAllMethods) {
      const double o = u(rng);
      reports.emplace(m, report(m, u(rng), u(rng), o));
      orpes[m].push_back(o);
    }
  }
  const auto table = compare_methods(reports);
  ASSERT_EQ(table.rows.size(), 3u);
  for (MethodKind m : kAllMethods) {
    const auto & xs = orpes[m];
    double mean = 0.0;
    for (double x : xs) {
      mean += x;
    }
    mean /= 20.0;
    double ss = 0.0;
    for (double x : xs) {
      ss += (x - mean) * (x - mean);
    }
    const auto * row = table.find(m);
    ASSERT_NE(row, nullptr);
    EXPECT_NEAR(row->orpe.mean, mean, 1e-12);
    EXPECT_NEAR(row->orpe.stddev, std::sqrt(ss / 19.0), 1e-12);
    EXPECT_EQ(row->orpe.n, 20u);
  }
  const auto text = table.render();
  EXPECT_NE(text.find(" +- "), std::string::npos);
  EXPECT_NE(text.find("Baseline 2"), std::string::npos);
}

TEST(Metrics, ZeroNoiseBuoyOnlyRun)
{
  SurveyPlan plan;
  plan.swath_offsets = {-2.0, 11.0};
  plan.abeam_tolerance = 1e-9;
  plan.undulation_amplitude = 0.0;
  const auto ds = simulate_survey(default_farm(), plan, NoiseSpec::zero());
  const auto run = run_slam(ds, MethodKind::baseline_buoy_only);
  const auto m = compute_metrics(run.record, ds);
  EXPECT_EQ(m.method, MethodKind::baseline_buoy_only);
  EXPECT_LT(m.buoy_rmse, 1e-6);
  EXPECT_LT(m.orpe_rmse, 1e-6);
  ASSERT_TRUE(m.truth_rmse);
  EXPECT_LT(*m.truth_rmse, 1e-6);
  ASSERT_TRUE(m.rope_rmse);
  // detections projected through exact poses lie on straight ropes
  EXPECT_LT(*m.rope_rmse, 1e-6);
  EXPECT_EQ(m.factor_count, run.record.factor_count);
  EXPECT_EQ(m.orpe_series.size(), run.record.snapshots.size());
}
