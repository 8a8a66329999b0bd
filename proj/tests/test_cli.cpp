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
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "farmslam/dataset_io.hpp"

namespace fs = std::filesystem;

namespace
{

struct Result
{
  int status = -1;
  std::string output;
};

Result run_cli(const std::string & args, const std::string & env = "")
{
  const std::string cmd = env + " \"" FARMSLAM_CLI "\" " + args + " 2>&1";
  Result r;
  FILE * p = popen(cmd.c_str(), "r");
  if (!p) {
    return r;
  }
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) {
    r.output += buf.data();
  }
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::size_t count_lines_starting(const std::string & text, const std::string & prefix)
{
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    n += line.rfind(prefix, 0) == 0 ? 1 : 0;
    if (end == std::string::npos) {
      break;
    }
    pos = end + 1;
  }
  return n;
}

// Two passes keep every invocation short.
const std::string kSmall = "--survey.swath_offsets=-2,11 --bench.swaths=1,2";

class Cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("farmslam_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out() const { return "-o \"" + dir_.string() + "\" "; }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors)
{
  EXPECT_EQ(run_cli("--help").status, 0);
  EXPECT_EQ(run_cli("").status, 2);
  EXPECT_EQ(run_cli("frobnicate").status, 2);
  const auto bad = run_cli(out() + "--survey.speed=fast simulate");
  EXPECT_EQ(bad.status, 2);
  EXPECT_NE(bad.output.find("survey.speed"), std::string::npos) << bad.output;
  EXPECT_EQ(run_cli(out() + "--method=magic simulate").status, 2);
  EXPECT_EQ(run_cli(out() + "--survey.ping_rate=1.5 simulate").status, 2);
}

TEST_F(Cli, PrintConfigShowsPrecedence)
{
  farmslam::write_file(dir_ / "c.ini", "[survey]\nspeed = 0.5\nrun_in = 10\n");
  const auto r = run_cli("-c \"" + (dir_ / "c.ini").string() + "\" --survey.speed=0.7 --print-config");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("survey.speed = 0.7\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("survey.run_in = 10\n"), std::string::npos) << r.output;
  EXPECT_EQ(run_cli("-c \"" + (dir_ / "nope.ini").string() + "\" --print-config").status, 2);
}

TEST_F(Cli, SimulateRunEvaluate)
{
  auto r = run_cli(out() + kSmall + " simulate --out survey.jsonl");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("seed"), std::string::npos);
  ASSERT_TRUE(fs::exists(dir_ / "survey.jsonl"));
  ASSERT_TRUE(fs::exists(dir_ / "survey.truth.jsonl"));
  const auto dataset = (dir_ / "survey.jsonl").string();

  r = run_cli(out() + kSmall + " run \"" + dataset + "\" -m all");
  ASSERT_EQ(r.status, 0) << r.output;
  for (const char * m : {"proposed", "baseline_shared_rope", "baseline_buoy_only"}) {
    EXPECT_TRUE(fs::exists(dir_ / ("run_" + std::string(m) + ".json"))) << m;
  }
  const auto rec = farmslam::read_run_record(dir_ / "run_proposed.json");
  EXPECT_EQ(rec.dataset_hash, farmslam::dataset_hash(farmslam::read_dataset(dataset)));
  EXPECT_FALSE(rec.config_hash.empty());

  r = run_cli(out() + kSmall + " evaluate -d \"" + dataset + "\" \"" + (dir_ / "run_proposed.json").string() + "\" \"" +
              (dir_ / "run_baseline_buoy_only.json").string() + "\" \"" +
              (dir_ / "run_baseline_shared_rope.json").string() + "\"");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("RMSE (m)"), std::string::npos);
  EXPECT_EQ(count_lines_starting(r.output, "Proposed"), 1u);
  EXPECT_EQ(count_lines_starting(r.output, "Baseline 1"), 1u);
  EXPECT_EQ(count_lines_starting(r.output, "Baseline 2"), 1u);
  for (const char * f : {"metrics.json", "comparison.txt", "orpe.svg", "trajectory_proposed.svg",
         "trajectory_baseline_buoy_only.svg", "trajectory_baseline_shared_rope.svg"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const auto cmp = farmslam::read_file(dir_ / "comparison.txt");
  EXPECT_NE(cmp.find("config_hash"), std::string::npos);
}

TEST_F(Cli, SingleRunWithoutTruth)
{
  ASSERT_EQ(run_cli(out() + kSmall + " simulate --out s.jsonl").status, 0);
  fs::remove(dir_ / "s.truth.jsonl");
  const auto dataset = (dir_ / "s.jsonl").string();
  ASSERT_EQ(run_cli(out() + kSmall + " run \"" + dataset + "\" -m buoy_only").status, 0);
  const auto r =
    run_cli(out() + kSmall + " evaluate -d \"" + dataset + "\" \"" + (dir_ / "run_baseline_buoy_only.json").string() + "\"");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(count_lines_starting(r.output, "Baseline 1"), 1u);
  EXPECT_EQ(count_lines_starting(r.output, "Proposed"), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "trajectory_baseline_buoy_only.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "orpe.svg"));
  EXPECT_FALSE(fs::exists(dir_ / "trajectory_proposed.svg"));
  EXPECT_NE(farmslam::read_file(dir_ / "metrics.json").find("\"truth_rmse\": \"n/a\""), std::string::npos);
}

TEST_F(Cli, DataErrors)
{
  EXPECT_EQ(run_cli(out() + "run \"" + (dir_ / "missing.jsonl").string() + "\"").status, 3);
  farmslam::write_file(dir_ / "junk.jsonl", "{\"type\":\"farm\"\n");
  EXPECT_EQ(run_cli(out() + "run \"" + (dir_ / "junk.jsonl").string() + "\"").status, 3);

  ASSERT_EQ(run_cli(out() + kSmall + " --seed=1 simulate --out a.jsonl").status, 0);
  ASSERT_EQ(run_cli(out() + kSmall + " --seed=2 simulate --out b.jsonl").status, 0);
  ASSERT_EQ(run_cli(out() + kSmall + " run \"" + (dir_ / "a.jsonl").string() + "\" -m buoy_only").status, 0);
  const auto r = run_cli(out() + "evaluate -d \"" + (dir_ / "b.jsonl").string() + "\" \"" +
                         (dir_ / "run_baseline_buoy_only.json").string() + "\"");
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.output.find("different dataset"), std::string::npos) << r.output;
}

TEST_F(Cli, OutputDirFromEnvironment)
{
  const auto env = "FARMSLAM_OUTPUT_DIR=\"" + (dir_ / "envout").string() + "\"";
  ASSERT_EQ(run_cli(kSmall + " simulate --out e.jsonl", env).status, 0);
  EXPECT_TRUE(fs::exists(dir_ / "envout" / "e.jsonl"));
  // the flag wins over the environment
  ASSERT_EQ(run_cli("-o \"" + (dir_ / "flag").string() + "\" " + kSmall + " simulate --out e.jsonl", env).status, 0);
  EXPECT_TRUE(fs::exists(dir_ / "flag" / "e.jsonl"));
}

TEST_F(Cli, Bench)
{
  const auto r = run_cli(out() + kSmall + " bench -m buoy_only");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "bench.json"));
  EXPECT_NE(r.output.find("baseline_buoy_only"), std::string::npos) << r.output;
}
