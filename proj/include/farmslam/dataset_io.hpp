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
 * @file dataset_io.hpp
 * @brief Line-delimited JSON survey files, run records and metric reports.
 *
 * Survey file: a farm header object on the first line, then one event per
 * line. Odometry covariances are stored as the 6 upper-triangular entries
 * of the 3x3 matrix, row major. Ground truth goes to a parallel file of
 * {"t","x","y","theta"} lines.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "farmslam/evaluation.hpp"
#include "farmslam/slam_runner.hpp"
#include "farmslam/survey.hpp"

namespace farmslam
{

using json = nlohmann::json;

/// 64-bit FNV-1a digest as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path & path, std::string_view content)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw DataError("write failed for " + path.string());
  }
}

/// survey.jsonl -> survey.truth.jsonl
inline std::filesystem::path truth_path_for(const std::filesystem::path & dataset)
{
  auto p = dataset;
  p.replace_extension();
  return p.string() + ".truth.jsonl";
}

// ---------------------------------------------------------------------------
// Survey datasets

namespace detail
{

template<typename T>
T get_field(const json & j, const char * key, std::size_t line)
{
  if (!j.contains(key)) {
    throw DataError("line " + std::to_string(line) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw DataError("line " + std::to_string(line) + ": field '" + key + "' has the wrong type");
  }
}

inline json pose_json(const Pose2 & p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

inline Pose2 pose_from(const json & j, std::size_t line)
{
  return {get_field<double>(j, "x", line), get_field<double>(j, "y", line),
    get_field<double>(j, "theta", line)};
}

}  // namespace detail

inline std::string dataset_to_jsonl(const SurveyDataset & ds)
{
  std::ostringstream os;
  json header;
  header["type"] = "farm";
  header["buoys"] = json::array();
  for (const auto & b : ds.farm.buoys) {
    const double sigma = std::sqrt(b.prior.cov(0, 0));
    json jb{{"id", b.id}, {"x", b.prior.mean.x}, {"y", b.prior.mean.y}, {"sigma", sigma}};
    if (b.prior.cov != sigma * sigma * Eigen::Matrix2d::Identity()) {
      jb["cov"] = {b.prior.cov(0, 0), b.prior.cov(0, 1), b.prior.cov(1, 1)};
    }
    header["buoys"].push_back(jb);
  }
  header["ropes"] = json::array();
  for (const auto & r : ds.farm.ropes) {
    header["ropes"].push_back({{"id", r.id}, {"a", r.buoy_a}, {"b", r.buoy_b}, {"depth", r.depth}});
  }
  header["buoy_depth"] = ds.farm.buoy_depth;
  header["initial_pose"] = detail::pose_json(ds.initial_pose);
  header["start_time"] = ds.start_time;
  header["seed"] = ds.seed;
  header["config_hash"] = ds.config_hash;
  os << header.dump() << '\n';

  for (const auto & ev : ds.events) {
    json j;
    if (const auto * o = std::get_if<OdometryEvent>(&ev)) {
      const auto & c = o->delta.cov;
      j = {{"t", o->t}, {"type", "odom"}, {"dx", o->delta.dx}, {"dy", o->delta.dy},
        {"dtheta", o->delta.dtheta},
        {"cov", {c(0, 0), c(0, 1), c(0, 2), c(1, 1), c(1, 2), c(2, 2)}}};
    } else {
      const auto & d = std::get<Detection>(ev);
      j = {{"t", d.t}, {"type", "det"}, {"channel", std::string(to_string(d.channel))},
        {"class", std::string(to_string(d.klass))}, {"slant", d.slant_range}, {"depth", d.vehicle_depth}};
    }
    os << j.dump() << '\n';
  }
  return os.str();
}

inline std::string truth_to_jsonl(const std::vector<DrState> & truth)
{
  std::ostringstream os;
  for (const auto & s : truth) {
    os << json{{"t", s.t}, {"x", s.pose.x}, {"y", s.pose.y}, {"theta", s.pose.theta}}.dump() << '\n';
  }
  return os.str();
}

inline SurveyDataset dataset_from_jsonl(std::string_view text)
{
  SurveyDataset ds;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error & e) {
      throw DataError("line " + std::to_string(line) + ": " + e.what());
    }
    const auto type = detail::get_field<std::string>(j, "type", line);
    if (!have_header) {
      if (type != "farm") {
        throw DataError("line " + std::to_string(line) + ": expected the farm header first");
      }
      for (const auto & jb : detail::get_field<json>(j, "buoys", line)) {
        Buoy b;
        b.id = detail::get_field<int>(jb, "id", line);
        b.prior.mean = {detail::get_field<double>(jb, "x", line), detail::get_field<double>(jb, "y", line)};
        const double s = detail::get_field<double>(jb, "sigma", line);
        b.prior.cov = s * s * Eigen::Matrix2d::Identity();
        if (jb.contains("cov")) {
          const auto c = detail::get_field<std::vector<double>>(jb, "cov", line);
          if (c.size() != 3) {
            throw DataError("line " + std::to_string(line) + ": buoy cov needs 3 entries");
          }
          b.prior.cov << c[0], c[1], c[1], c[2];
        }
        ds.farm.buoys.push_back(b);
      }
      for (const auto & jr : detail::get_field<json>(j, "ropes", line)) {
        ds.farm.ropes.push_back({detail::get_field<int>(jr, "id", line), detail::get_field<int>(jr, "a", line),
          detail::get_field<int>(jr, "b", line), detail::get_field<double>(jr, "depth", line)});
      }
      ds.farm.buoy_depth = j.value("buoy_depth", 0.0);
      if (j.contains("initial_pose")) {
        ds.initial_pose = detail::pose_from(j["initial_pose"], line);
      }
      ds.start_time = j.value("start_time", 0.0);
      ds.seed = j.value("seed", std::uint64_t{0});
      ds.config_hash = j.value("config_hash", std::string{});
      try {
        ds.farm.validate();
      } catch (const InvalidArgument & e) {
        throw DataError(std::string("farm header: ") + e.what());
      }
      have_header = true;
      continue;
    }
    const double t = detail::get_field<double>(j, "t", line);
    if (type == "odom") {
      OdometryEvent o;
      o.t = t;
      o.delta.dx = detail::get_field<double>(j, "dx", line);
      o.delta.dy = detail::get_field<double>(j, "dy", line);
      o.delta.dtheta = detail::get_field<double>(j, "dtheta", line);
      const auto c = detail::get_field<std::vector<double>>(j, "cov", line);
      if (c.size() != 6) {
        throw DataError("line " + std::to_string(line) + ": odometry cov needs 6 entries");
      }
      o.delta.cov << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
      ds.events.emplace_back(o);
    } else if (type == "det") {
      Detection d;
      d.t = t;
      const auto ch = detail::get_field<std::string>(j, "channel", line);
      const auto cl = detail::get_field<std::string>(j, "class", line);
      if (ch != "port" && ch != "stbd") {
        throw DataError("line " + std::to_string(line) + ": channel must be port or stbd");
      }
      if (cl != "buoy" && cl != "rope") {
        throw DataError("line " + std::to_string(line) + ": class must be buoy or rope");
      }
      d.channel = ch == "port" ? Channel::port : Channel::starboard;
      d.klass = cl == "buoy" ? TargetClass::buoy : TargetClass::rope;
      d.slant_range = detail::get_field<double>(j, "slant", line);
      d.vehicle_depth = detail::get_field<double>(j, "depth", line);
      ds.events.emplace_back(d);
    } else {
      throw DataError("line " + std::to_string(line) + ": unknown event type '" + type + "'");
    }
  }
  if (!have_header) {
    throw DataError("dataset has no farm header");
  }
  ds.validate();
  return ds;
}

inline std::vector<DrState> truth_from_jsonl(std::string_view text)
{
  std::vector<DrState> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error & e) {
      throw DataError("truth line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back({detail::pose_from(j, line), detail::get_field<double>(j, "t", line)});
  }
  return out;
}

/// Identity of a survey as used by run records; ground truth is not part of it.
inline std::string dataset_hash(const SurveyDataset & ds) { return fnv1a_hex(dataset_to_jsonl(ds)); }

/// Writes the survey and, when present, its ground truth next to it.
inline void write_dataset(const std::filesystem::path & path, const SurveyDataset & ds)
{
  write_file(path, dataset_to_jsonl(ds));
  if (ds.ground_truth) {
    write_file(truth_path_for(path), truth_to_jsonl(*ds.ground_truth));
  }
}

inline SurveyDataset read_dataset(const std::filesystem::path & path)
{
  auto ds = dataset_from_jsonl(read_file(path));
  const auto tp = truth_path_for(path);
  if (std::filesystem::exists(tp)) {
    ds.ground_truth = truth_from_jsonl(read_file(tp));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Run records

inline json run_record_to_json(const RunRecord & r)
{
  json j;
  j["method"] = std::string(to_string(r.method));
  j["dataset_hash"] = r.dataset_hash;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["factor_count"] = r.factor_count;
  j["total_solver_seconds"] = r.total_solver_seconds;
  j["max_update_seconds"] = r.max_update_seconds;
  j["pose_times"] = r.pose_times;
  j["rope_owner"] = r.rope_owner;
  j["counters"] = {{"infeasible", r.counters.infeasible}, {"buoy_rejected", r.counters.buoy_rejected},
    {"rope_low_confidence", r.counters.rope_low_confidence}, {"rope_discarded", r.counters.rope_discarded}};
  auto & snaps = j["snapshots"] = json::array();
  for (const auto & s : r.snapshots) {
    snaps.push_back({{"t", s.t}, {"pose_index", s.pose_index}, {"x", s.pose.x}, {"y", s.pose.y},
      {"theta", s.pose.theta}, {"update_seconds", s.update_seconds}, {"factor_count", s.factor_count}});
  }
  const auto & v = r.final_estimate.values;
  json fin;
  fin["chi2"] = r.final_estimate.chi2;
  fin["iterations"] = r.final_estimate.iterations;
  fin["converged"] = r.final_estimate.converged;
  fin["poses"] = json::array();
  for (const auto & p : v.poses) {
    fin["poses"].push_back({p.x, p.y, p.theta});
  }
  fin["buoys"] = json::array();
  for (const auto & b : v.buoys) {
    fin["buoys"].push_back({b.x, b.y});
  }
  fin["ropes"] = json::array();
  for (const auto & l : v.ropes) {
    fin["ropes"].push_back({l.x, l.y});
  }
  j["final"] = fin;
  auto & assoc = j["associations"] = json::array();
  for (const auto & a : r.associations) {
    json ja{{"t", a.t}, {"pose", a.pose_index}, {"class", std::string(to_string(a.klass))},
      {"channel", std::string(to_string(a.channel))}, {"range", a.range}, {"bearing", a.bearing},
      {"target", a.target_id}, {"low_confidence", a.low_confidence}, {"infeasible", a.infeasible},
      {"used", a.used}};
    if (a.landmark_index) {
      ja["landmark"] = *a.landmark_index;
    }
    assoc.push_back(ja);
  }
  return j;
}

inline RunRecord run_record_from_json(const json & j)
{
  try {
    RunRecord r;
    const auto m = parse_method(j.at("method").get<std::string>());
    if (!m) {
      throw DataError("run record has an unknown method");
    }
    r.method = *m;
    r.dataset_hash = j.at("dataset_hash").get<std::string>();
    r.config_hash = j.value("config_hash", std::string{});
    r.seed = j.value("seed", std::uint64_t{0});
    r.factor_count = j.at("factor_count").get<std::size_t>();
    r.total_solver_seconds = j.at("total_solver_seconds").get<double>();
    r.max_update_seconds = j.at("max_update_seconds").get<double>();
    r.pose_times = j.at("pose_times").get<std::vector<double>>();
    r.rope_owner = j.at("rope_owner").get<std::vector<int>>();
    const auto & c = j.at("counters");
    r.counters = {c.at("infeasible").get<std::size_t>(), c.at("buoy_rejected").get<std::size_t>(),
      c.at("rope_low_confidence").get<std::size_t>(), c.at("rope_discarded").get<std::size_t>()};
    for (const auto & s : j.at("snapshots")) {
      r.snapshots.push_back({s.at("t").get<double>(), s.at("pose_index").get<std::size_t>(),
        Pose2(s.at("x").get<double>(), s.at("y").get<double>(), s.at("theta").get<double>()),
        s.at("update_seconds").get<double>(), s.at("factor_count").get<std::size_t>()});
    }
    const auto & fin = j.at("final");
    r.final_estimate.chi2 = fin.at("chi2").get<double>();
    r.final_estimate.iterations = fin.at("iterations").get<int>();
    r.final_estimate.converged = fin.at("converged").get<bool>();
    for (const auto & p : fin.at("poses")) {
      r.final_estimate.values.poses.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    }
    for (const auto & b : fin.at("buoys")) {
      r.final_estimate.values.buoys.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    }
    for (const auto & l : fin.at("ropes")) {
      r.final_estimate.values.ropes.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
    }
    for (const auto & ja : j.at("associations")) {
      AssociationRecord a;
      a.t = ja.at("t").get<double>();
      a.pose_index = ja.at("pose").get<std::size_t>();
      a.klass = ja.at("class").get<std::string>() == "buoy" ? TargetClass::buoy : TargetClass::rope;
      a.channel = ja.at("channel").get<std::string>() == "port" ? Channel::port : Channel::starboard;
      a.range = ja.at("range").get<double>();
      a.bearing = ja.at("bearing").get<double>();
      a.target_id = ja.at("target").get<int>();
      a.low_confidence = ja.at("low_confidence").get<bool>();
      a.infeasible = ja.at("infeasible").get<bool>();
      a.used = ja.at("used").get<bool>();
      if (ja.contains("landmark")) {
        a.landmark_index = ja.at("landmark").get<std::size_t>();
      }
      r.associations.push_back(a);
    }
    return r;
  } catch (const json::exception & e) {
    throw DataError(std::string("malformed run record: ") + e.what());
  }
}

inline void write_run_record(const std::filesystem::path & path, const RunRecord & r)
{
  write_file(path, run_record_to_json(r).dump(1) + "\n");
}

inline RunRecord read_run_record(const std::filesystem::path & path)
{
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error & e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return run_record_from_json(j);
}

// ---------------------------------------------------------------------------
// Metrics

inline json metrics_to_json(const MetricsReport & m)
{
  auto opt = [](const std::optional<double> & v) { return v ? json(*v) : json("n/a"); };
  json j{{"method", std::string(to_string(m.method))}, {"rope_rmse", opt(m.rope_rmse)},
    {"buoy_rmse", m.buoy_rmse}, {"orpe_rmse", m.orpe_rmse}, {"orpe_heading_rmse", m.orpe_heading_rmse},
    {"max_update_time", m.max_update_time}, {"total_time", m.total_time},
    {"factor_count", m.factor_count}, {"truth_rmse", opt(m.truth_rmse)}};
  auto & series = j["orpe_series"] = json::array();
  for (const auto & [t, e] : m.orpe_series) {
    series.push_back({t, e});
  }
  return j;
}

}  // namespace farmslam
