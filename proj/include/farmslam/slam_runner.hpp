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
 * @file slam_runner.hpp
 * @brief Replays a survey through the front-end and the incremental solver.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "farmslam/association.hpp"
#include "farmslam/factor_graph.hpp"
#include "farmslam/survey.hpp"

namespace farmslam
{

struct SlamConfig
{
  FrontendConfig frontend;
  SolverConfig solver;
};

/// Online estimate of the newest pose right after a solver update.
struct Snapshot
{
  double t = 0.0;
  std::size_t pose_index = 0;
  Pose2 pose;
  double update_seconds = 0.0;
  std::size_t factor_count = 0;
};

struct RunRecord
{
  MethodKind method = MethodKind::proposed;
  std::vector<Snapshot> snapshots;
  /// Timestamp of every pose variable.
  std::vector<double> pose_times;
  GraphEstimate final_estimate;
  std::vector<AssociationRecord> associations;
  FrontendCounters counters;
  /// Physical rope id of every rope variable.
  std::vector<int> rope_owner;
  std::size_t factor_count = 0;
  double total_solver_seconds = 0.0;
  double max_update_seconds = 0.0;
  std::string dataset_hash;
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct SlamRun
{
  RunRecord record;
  FactorGraph graph;
};

/// Processes events strictly in time order. Each pose step (one odometry
/// event plus the detections up to the next one) ends with a solver update
/// and a snapshot of the newest pose.
inline SlamRun run_slam(const SurveyDataset & dataset, MethodKind method, const SlamConfig & config = {})
{
  SlamRun run;
  auto & rec = run.record;
  auto & graph = run.graph;
  rec.method = method;
  rec.seed = dataset.seed;

  Frontend frontend(method, dataset.farm, config.frontend);
  VariableId current = frontend.initialize(graph, dataset.initial_pose);
  double current_t = dataset.start_time;
  rec.pose_times.push_back(current_t);

  std::size_t event_index = 0;
  auto finish_step = [&]() {
    const auto t0 = std::chrono::steady_clock::now();
    GraphEstimate est;
    try {
      est = graph.update_incremental({}, config.solver);
    } catch (const SingularSystem & e) {
      throw SingularSystem(std::string(e.what()) + " (at event " + std::to_string(event_index) + ")");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.total_solver_seconds += secs;
    rec.max_update_seconds = std::max(rec.max_update_seconds, secs);
    rec.snapshots.push_back({current_t, current.index, est.values.pose(current), secs, graph.num_factors()});
    rec.final_estimate = std::move(est);
  };

  for (; event_index < dataset.events.size(); ++event_index) {
    const auto & ev = dataset.events[event_index];
    if (const auto * odo = std::get_if<OdometryEvent>(&ev)) {
      finish_step();
      current = frontend.add_odometry(graph, odo->delta);
      current_t = odo->t;
      rec.pose_times.push_back(current_t);
    } else {
      frontend.process_detection(std::get<Detection>(ev), current, graph);
    }
  }
  finish_step();

  rec.associations = frontend.log();
  rec.counters = frontend.counters();
  rec.rope_owner = frontend.rope_variable_owner();
  rec.factor_count = graph.num_factors();
  return run;
}

}  // namespace farmslam
