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

// farmslam command line: simulate, run, evaluate, bench.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "farmslam.hpp"

namespace fs = std::filesystem;
using namespace farmslam;

namespace
{

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kSolverError = 4 };

struct Options
{
  std::string config_file;
  std::string output_dir;
  std::map<std::string, std::string> overrides;
};

// Defaults, then the config file, then --section.key flags.
RunConfig resolve_config(const Options & opt)
{
  RunConfig cfg;
  if (!opt.config_file.empty()) {
    apply_config_file(cfg, opt.config_file);
  }
  for (const auto & [k, v] : opt.overrides) {
    set_config_value(cfg, k, v);
  }
  validate_config(cfg);
  if (!opt.output_dir.empty()) {
    cfg.output_dir = opt.output_dir;
  } else if (const char * env = std::getenv("FARMSLAM_OUTPUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  return cfg;
}

fs::path in_output_dir(const RunConfig & cfg, const std::string & path)
{
  const fs::path p(path);
  return p.is_absolute() || p.has_parent_path() ? p : cfg.output_dir / p;
}

std::vector<MethodKind> parse_methods(const std::string & text)
{
  std::vector<MethodKind> out;
  for (const auto & tok : detail::split_list(text)) {
    if (tok == "all") {
      out.assign(kAllMethods.begin(), kAllMethods.end());
      continue;
    }
    const auto m = parse_method(tok);
    if (!m) {
      throw ConfigError("method: unknown method '" + tok + "'");
    }
    out.push_back(*m);
  }
  if (out.empty()) {
    throw ConfigError("method: nothing to run");
  }
  return out;
}

FarmModel farm_from(const RunConfig & cfg)
{
  try {
    return default_farm(cfg.farm);
  } catch (const InvalidArgument & e) {
    throw ConfigError(std::string("farm: ") + e.what());
  }
}

SurveyDataset simulate_from(const RunConfig & cfg)
{
  try {
    auto ds = simulate_survey(farm_from(cfg), cfg.plan, cfg.noise);
    ds.config_hash = config_hash(cfg);
    return ds;
  } catch (const InvalidArgument & e) {
    throw ConfigError(e.what());
  }
}

int cmd_simulate(const RunConfig & cfg, const std::string & out_name)
{
  const auto ds = simulate_from(cfg);
  const auto path = in_output_dir(cfg, out_name);
  write_dataset(path, ds);
  std::size_t ropes = 0;
  for (const auto & ev : ds.events) {
    if (const auto * d = std::get_if<Detection>(&ev); d && d->klass == TargetClass::rope) {
      ++ropes;
    }
  }
  std::printf("wrote %s\n", path.string().c_str());
  std::printf("path length      %.1f m\n", path_length(*ds.ground_truth));
  std::printf("duration         %.1f s\n", ds.ground_truth->back().t - ds.ground_truth->front().t);
  std::printf("odometry events  %zu\n", ds.count_odometry());
  std::printf("rope detections  %zu\n", ropes);
  std::printf("buoy detections  %zu\n", ds.count_detections() - ropes);
  std::printf("config hash      %s\nseed             %llu\n", ds.config_hash.c_str(),
    static_cast<unsigned long long>(ds.seed));
  return kOk;
}

RunRecord run_one(const SurveyDataset & ds, const std::string & ds_hash, MethodKind m, const RunConfig & cfg)
{
  auto rec = run_slam(ds, m, cfg.slam).record;
  rec.dataset_hash = ds_hash;
  rec.config_hash = config_hash(cfg);
  return rec;
}

int cmd_run(const RunConfig & cfg, const std::string & dataset, const std::string & methods)
{
  const auto ds = read_dataset(dataset);
  const auto hash = dataset_hash(ds);
  for (const auto m : parse_methods(methods.empty() ? std::string(to_string(cfg.method)) : methods)) {
    const auto rec = run_one(ds, hash, m, cfg);
    const auto path = cfg.output_dir / ("run_" + std::string(to_string(m)) + ".json");
    write_run_record(path, rec);
    std::printf("%-22s factors %5zu  chi2 %.6g  max update %.3f s  total %.2f s  -> %s\n",
      std::string(to_string(m)).c_str(), rec.factor_count, rec.final_estimate.chi2, rec.max_update_seconds,
      rec.total_solver_seconds, path.string().c_str());
  }
  return kOk;
}

int cmd_evaluate(const RunConfig & cfg, const std::string & dataset, const std::vector<std::string> & records)
{
  const auto ds = read_dataset(dataset);
  const auto hash = dataset_hash(ds);
  std::vector<RunRecord> runs;
  for (const auto & r : records) {
    runs.push_back(read_run_record(r));
    if (runs.back().dataset_hash != hash) {
      throw DataError(r + " was produced from a different dataset (hash " + runs.back().dataset_hash +
        ", expected " + hash + ")");
    }
  }
  std::vector<MetricsReport> reports;
  std::multimap<MethodKind, MetricsReport> by_method;
  json out;
  out["dataset_hash"] = hash;
  out["config_hash"] = config_hash(cfg);
  out["seed"] = ds.seed;
  out["orpe_note"] = "oRPE is positional; heading is reported separately as orpe_heading_rmse";
  out["reports"] = json::array();
  for (const auto & run : runs) {
    auto m = compute_metrics(run, ds, cfg.slam.frontend);
    out["reports"].push_back(metrics_to_json(m));
    by_method.emplace(m.method, m);
    reports.push_back(std::move(m));
    write_file(cfg.output_dir / ("trajectory_" + std::string(to_string(run.method)) + ".svg"),
      trajectory_svg(ds, run));
  }
  write_file(cfg.output_dir / "orpe.svg", orpe_svg(reports, config_hash(cfg), ds.seed));
  const auto table = compare_methods(by_method).render();
  write_file(cfg.output_dir / "metrics.json", out.dump(1) + "\n");
  write_file(cfg.output_dir / "comparison.txt",
    table + "config_hash " + config_hash(cfg) + "  seed " + std::to_string(ds.seed) + "\n");
  std::cout << table;
  for (const auto & m : reports) {
    std::printf("%-22s truth RMSE %s  max update %.3f s  factors %zu\n", std::string(to_string(m.method)).c_str(),
      m.truth_rmse ? detail::fmt_real(std::round(*m.truth_rmse * 1000) / 1000).c_str() : "n/a",
      m.max_update_time, m.factor_count);
  }
  return kOk;
}

int cmd_bench(const RunConfig & cfg, const std::string & methods)
{
  json out;
  out["config_hash"] = config_hash(cfg);
  out["seed"] = cfg.noise.seed;
  out["rows"] = json::array();
  std::printf("%-22s %6s %8s %10s %10s %10s %11s\n", "method", "swaths", "factors", "max upd s", "total s",
    "survey s", "utilization");
  const auto ms = parse_methods(methods.empty() ? "all" : methods);
  for (int n : cfg.bench_swaths) {
    RunConfig c = cfg;
    c.plan.swath_offsets.resize(static_cast<std::size_t>(n));
    const auto ds = simulate_from(c);
    const double duration = ds.ground_truth->back().t - ds.ground_truth->front().t;
    for (const auto m : ms) {
      const auto rec = run_one(ds, dataset_hash(ds), m, c);
      const double util = duration > 0.0 ? rec.total_solver_seconds / duration : 0.0;
      std::printf("%-22s %6d %8zu %10.4f %10.3f %10.1f %10.1f%%\n", std::string(to_string(m)).c_str(), n,
        rec.factor_count, rec.max_update_seconds, rec.total_solver_seconds, duration, 100.0 * util);
      out["rows"].push_back({{"method", std::string(to_string(m))}, {"swaths", n}, {"factors", rec.factor_count},
        {"max_update_seconds", rec.max_update_seconds}, {"total_solver_seconds", rec.total_solver_seconds},
        {"survey_seconds", duration}, {"utilization", util}});
    }
  }
  const auto path = cfg.output_dir / "bench.json";
  write_file(path, out.dump(1) + "\n");
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Side-scan sonar graph SLAM for algae farm surveys"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Options opt;
  app.add_option("-c,--config", opt.config_file, "settings file ([section] key = value)")->check(CLI::ExistingFile);
  app.add_option("-o,--output-dir", opt.output_dir, "output directory (also FARMSLAM_OUTPUT_DIR)");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the resolved settings and exit");

  std::map<std::string, std::string> raw;
  for (const auto & k : config_keys()) {
    app.add_option("--" + k.name, raw[k.name], k.help)->group("Settings");
  }

  std::string sim_out = "survey.jsonl";
  auto * sim = app.add_subcommand("simulate", "generate a synthetic survey dataset");
  sim->add_option("--out", sim_out, "dataset file name");

  std::string run_dataset;
  std::string run_methods;
  auto * run = app.add_subcommand("run", "replay a dataset through one or more methods");
  run->add_option("dataset", run_dataset, "dataset file")->required();
  run->add_option("-m,--methods", run_methods, "comma separated methods or 'all' (default: method setting)");

  std::string eval_dataset;
  std::vector<std::string> eval_records;
  auto * eval = app.add_subcommand("evaluate", "metrics, comparison table and plots for run records");
  eval->add_option("-d,--dataset", eval_dataset, "dataset the runs were made on")->required();
  eval->add_option("records", eval_records, "run record files")->required();

  std::string bench_methods;
  auto * bench = app.add_subcommand("bench", "solver timing over growing surveys");
  bench->add_option("-m,--methods", bench_methods, "comma separated methods or 'all'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    for (const auto & k : config_keys()) {
      if (app.count("--" + k.name) > 0) {
        opt.overrides[k.name] = raw[k.name];
      }
    }
    const auto cfg = resolve_config(opt);
    if (print_config) {
      std::cout << dump_config(cfg) << "# config_hash " << config_hash(cfg) << "\n";
      return kOk;
    }
    if (*sim) {
      return cmd_simulate(cfg, sim_out);
    }
    if (*run) {
      return cmd_run(cfg, run_dataset, run_methods);
    }
    if (*eval) {
      return cmd_evaluate(cfg, eval_dataset, eval_records);
    }
    if (*bench) {
      return cmd_bench(cfg, bench_methods);
    }
    std::cerr << "a subcommand is required\n" << app.help();
    return kConfigError;
  } catch (const ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SingularSystem & e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const Error & e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}
