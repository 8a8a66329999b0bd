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
 * @file config.hpp
 * @brief Run configuration: one flat table of "section.key" settings.
 *
 * The same keys are accepted from an INI-style file ("[noise]" then
 * "range_sigma = 0.1") and as "--noise.range_sigma 0.1" on the command line.
 * Defaults are applied first, then the file, then flags.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "farmslam/dataset_io.hpp"
#include "farmslam/simulator.hpp"
#include "farmslam/slam_runner.hpp"

namespace farmslam
{

struct RunConfig
{
  MethodKind method = MethodKind::proposed;
  FarmLayout farm;
  SurveyPlan plan;
  NoiseSpec noise;
  SlamConfig slam;
  /// Bench sweep: number of swaths flown, one survey per entry.
  std::vector<int> bench_swaths{1, 2, 3, 4, 5};
  std::filesystem::path output_dir{"out"};
};

struct ConfigKey
{
  std::string name;
  std::string help;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

namespace detail
{

/// Shortest %g form that reads back to the same double.
inline std::string fmt_real(double v)
{
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

/// Degree display of a radian value; 12 digits hide the conversion noise.
inline std::string fmt_degrees(double rad)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", rad2deg(rad));
  return buf;
}

inline std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n\"'");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string & key, const std::string & raw, double lo, double hi)
{
  const auto s = trim(raw);
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw ConfigError(key + ": expected a number, got '" + raw + "'");
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + raw + "'");
  }
  if (v < lo || v > hi) {
    throw ConfigError(key + ": " + fmt_real(v) + " is outside [" + fmt_real(lo) + ", " + fmt_real(hi) + "]");
  }
  return v;
}

inline double parse_positive(const std::string & key, const std::string & raw)
{
  const double v = parse_real(key, raw, 0.0, std::numeric_limits<double>::max());
  if (!(v > 0.0)) {
    throw ConfigError(key + ": must be > 0");
  }
  return v;
}

inline long long parse_integer(const std::string & key, const std::string & raw, long long lo, long long hi)
{
  const auto s = trim(raw);
  long long v = 0;
  std::size_t used = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception &) {
    throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  }
  if (used != s.size()) {
    throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  }
  if (v < lo || v > hi) {
    throw ConfigError(key + ": " + std::to_string(v) + " is outside [" + std::to_string(lo) + ", " +
      std::to_string(hi) + "]");
  }
  return v;
}

/// Comma or whitespace separated list, optionally bracketed.
inline std::vector<std::string> split_list(const std::string & raw)
{
  std::string s = raw;
  for (char & c : s) {
    if (c == ',' || c == '[' || c == ']') {
      c = ' ';
    }
  }
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) {
    out.push_back(tok);
  }
  return out;
}

template<typename T>
std::string join(const std::vector<T> & xs)
{
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) {
      out += ',';
    }
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_real(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

// Helpers that build table entries for plain fields.
using Access = std::function<double &(RunConfig &)>;

inline ConfigKey real_key(std::string name, std::string help, Access f, double lo, double hi)
{
  ConfigKey k;
  k.name = name;
  k.help = std::move(help);
  k.set = [name, f, lo, hi](RunConfig & c, const std::string & v) { f(c) = parse_real(name, v, lo, hi); };
  k.get = [f](const RunConfig & c) { return fmt_real(f(const_cast<RunConfig &>(c))); };
  return k;
}

inline ConfigKey positive_key(std::string name, std::string help, Access f)
{
  ConfigKey k;
  k.name = name;
  k.help = std::move(help);
  k.set = [name, f](RunConfig & c, const std::string & v) { f(c) = parse_positive(name, v); };
  k.get = [f](const RunConfig & c) { return fmt_real(f(const_cast<RunConfig &>(c))); };
  return k;
}

/// Stored in radians, exposed in degrees.
inline ConfigKey degree_key(std::string name, std::string help, Access f, double lo, double hi)
{
  ConfigKey k;
  k.name = name;
  k.help = std::move(help);
  k.set = [name, f, lo, hi](RunConfig & c, const std::string & v) { f(c) = deg2rad(parse_real(name, v, lo, hi)); };
  k.get = [f](const RunConfig & c) { return fmt_degrees(f(const_cast<RunConfig &>(c))); };
  return k;
}

/// Sigma key for a diagonal entry of a covariance matrix.
template<typename M>
ConfigKey sigma_key(std::string name, std::string help, std::function<M &(RunConfig &)> f, int i, bool degrees)
{
  ConfigKey k;
  k.name = name;
  k.help = std::move(help);
  k.set = [name, f, i, degrees](RunConfig & c, const std::string & v) {
    double s = parse_positive(name, v);
    if (degrees) {
      s = deg2rad(s);
    }
    f(c)(i, i) = s * s;
  };
  k.get = [f, i, degrees](const RunConfig & c) {
    const double s = std::sqrt(f(const_cast<RunConfig &>(c))(i, i));
    return degrees ? fmt_degrees(s) : fmt_real(s);
  };
  return k;
}

}  // namespace detail

/// Every recognised key, in a fixed order (also the order of the hash input).
inline constexpr double kConfigInf = std::numeric_limits<double>::max();

inline const std::vector<ConfigKey> & config_keys()
{
  using namespace detail;
  using M3 = Eigen::Matrix3d;
  using M2 = Eigen::Matrix2d;
  static const std::vector<ConfigKey> keys = [&] {
    std::vector<ConfigKey> k;
    k.push_back({"method", "proposed | shared | buoy_only",
      [](RunConfig & c, const std::string & v) {
        const auto m = parse_method(trim(v));
        if (!m) {
          throw ConfigError("method: unknown method '" + v + "'");
        }
        c.method = *m;
      },
      [](const RunConfig & c) { return std::string(to_string(c.method)); }});
    k.push_back({"seed", "simulation seed",
      [](RunConfig & c, const std::string & v) {
        c.noise.seed = static_cast<std::uint64_t>(parse_integer("seed", v, 0, std::numeric_limits<long long>::max()));
      },
      [](const RunConfig & c) { return std::to_string(c.noise.seed); }});

    // farm
    k.push_back({"farm.rope_count", "number of parallel ropes",
      [](RunConfig & c, const std::string & v) { c.farm.rope_count = static_cast<int>(parse_integer("farm.rope_count", v, 1, 1000)); },
      [](const RunConfig & c) { return std::to_string(c.farm.rope_count); }});
    k.push_back(positive_key("farm.rope_length", "buoy to buoy distance (m)", [](RunConfig & c) -> double & { return c.farm.rope_length; }));
    k.push_back(positive_key("farm.rope_spacing", "distance between rope lines (m)", [](RunConfig & c) -> double & { return c.farm.rope_spacing; }));
    k.push_back(real_key("farm.rope_depth", "rope depth (m)", [](RunConfig & c) -> double & { return c.farm.rope_depth; }, 0.0, kConfigInf));
    k.push_back(real_key("farm.buoy_depth", "buoy depth (m)", [](RunConfig & c) -> double & { return c.farm.buoy_depth; }, 0.0, kConfigInf));
    k.push_back(positive_key("farm.buoy_sigma", "isotropic buoy prior sigma (m)", [](RunConfig & c) -> double & { return c.farm.buoy_sigma; }));

    // survey
    k.push_back({"survey.swath_offsets", "lateral position of each pass (m), comma separated",
      [](RunConfig & c, const std::string & v) {
        std::vector<double> out;
        for (const auto & tok : split_list(v)) {
          out.push_back(parse_real("survey.swath_offsets", tok, -kConfigInf, kConfigInf));
        }
        if (out.empty()) {
          throw ConfigError("survey.swath_offsets: at least one swath is required");
        }
        c.plan.swath_offsets = out;
      },
      [](const RunConfig & c) { return join(c.plan.swath_offsets); }});
    k.push_back(positive_key("survey.speed", "vehicle speed (m/s)", [](RunConfig & c) -> double & { return c.plan.speed; }));
    k.push_back(positive_key("survey.ping_rate", "detector output rate (Hz)", [](RunConfig & c) -> double & { return c.plan.ping_rate; }));
    k.push_back(positive_key("survey.pose_rate", "pose and odometry rate (Hz)", [](RunConfig & c) -> double & { return c.plan.pose_rate; }));
    k.push_back(real_key("survey.run_in", "straight run past the rope ends (m)", [](RunConfig & c) -> double & { return c.plan.run_in; }, 0.0, kConfigInf));
    k.push_back(real_key("survey.vehicle_depth", "vehicle depth (m)", [](RunConfig & c) -> double & { return c.plan.vehicle_depth; }, 0.0, kConfigInf));
    k.push_back(positive_key("survey.max_range", "maximum sonar slant range (m)", [](RunConfig & c) -> double & { return c.plan.max_range; }));
    k.push_back(degree_key("survey.abeam_tolerance", "buoy abeam tolerance (deg)", [](RunConfig & c) -> double & { return c.plan.abeam_tolerance; }, 0.0, 90.0));
    k.push_back(degree_key("survey.min_incidence", "minimum ping/rope incidence angle (deg)", [](RunConfig & c) -> double & { return c.plan.min_incidence; }, 0.0, 90.0));
    k.push_back(real_key("survey.undulation", "rope undulation amplitude (m)", [](RunConfig & c) -> double & { return c.plan.undulation_amplitude; }, 0.0, kConfigInf));

    // noise
    k.push_back(real_key("noise.odom_sigma_x", "surge noise per step (m)", [](RunConfig & c) -> double & { return c.noise.odom_sigma[0]; }, 0.0, kConfigInf));
    k.push_back(real_key("noise.odom_sigma_y", "sway noise per step (m)", [](RunConfig & c) -> double & { return c.noise.odom_sigma[1]; }, 0.0, kConfigInf));
    k.push_back(degree_key("noise.odom_sigma_theta", "heading noise per step (deg)", [](RunConfig & c) -> double & { return c.noise.odom_sigma[2]; }, 0.0, 180.0));
    k.push_back(real_key("noise.odom_bias_x", "surge bias per step (m)", [](RunConfig & c) -> double & { return c.noise.odom_bias[0]; }, -kConfigInf, kConfigInf));
    k.push_back(real_key("noise.odom_bias_y", "sway bias per step (m)", [](RunConfig & c) -> double & { return c.noise.odom_bias[1]; }, -kConfigInf, kConfigInf));
    k.push_back(degree_key("noise.odom_bias_theta", "heading bias per step (deg)", [](RunConfig & c) -> double & { return c.noise.odom_bias[2]; }, -180.0, 180.0));
    k.push_back(positive_key("noise.odom_sigma_floor", "covariance sigma used where a noise sigma is 0", [](RunConfig & c) -> double & { return c.noise.odom_sigma_floor; }));
    k.push_back(real_key("noise.range_sigma", "slant range noise (m)", [](RunConfig & c) -> double & { return c.noise.range_sigma; }, 0.0, kConfigInf));
    k.push_back(real_key("noise.rope_detection_prob", "rope detection probability", [](RunConfig & c) -> double & { return c.noise.rope_detection_prob; }, 0.0, 1.0));
    k.push_back(real_key("noise.buoy_detection_prob", "buoy detection probability", [](RunConfig & c) -> double & { return c.noise.buoy_detection_prob; }, 0.0, 1.0));

    // frontend
    auto pp = std::function<M3 &(RunConfig &)>([](RunConfig & c) -> M3 & { return c.slam.frontend.pose_prior_cov; });
    auto bo = std::function<M2 &(RunConfig &)>([](RunConfig & c) -> M2 & { return c.slam.frontend.buoy_obs_cov; });
    auto ro = std::function<M2 &(RunConfig &)>([](RunConfig & c) -> M2 & { return c.slam.frontend.rope_obs_cov; });
    k.push_back(sigma_key<M3>("frontend.pose_prior_sigma_x", "initial pose sigma x (m)", pp, 0, false));
    k.push_back(sigma_key<M3>("frontend.pose_prior_sigma_y", "initial pose sigma y (m)", pp, 1, false));
    k.push_back(sigma_key<M3>("frontend.pose_prior_sigma_theta", "initial heading sigma (deg)", pp, 2, true));
    k.push_back({"frontend.buoy_prior_sigma", "isotropic buoy prior sigma (m), 'dataset' keeps the farm file values",
      [](RunConfig & c, const std::string & v) {
        if (trim(v) == "dataset") {
          c.slam.frontend.buoy_prior_cov.reset();
          return;
        }
        const double s = parse_positive("frontend.buoy_prior_sigma", v);
        c.slam.frontend.buoy_prior_cov = s * s * M2::Identity();
      },
      [](const RunConfig & c) {
        const auto & b = c.slam.frontend.buoy_prior_cov;
        return b ? fmt_real(std::sqrt((*b)(0, 0))) : std::string("dataset");
      }});
    k.push_back(sigma_key<M2>("frontend.buoy_range_sigma", "buoy observation range sigma (m)", bo, 0, false));
    k.push_back(sigma_key<M2>("frontend.buoy_bearing_sigma", "buoy observation bearing sigma (rad)", bo, 1, false));
    k.push_back(sigma_key<M2>("frontend.rope_range_sigma", "rope observation range sigma (m)", ro, 0, false));
    k.push_back(sigma_key<M2>("frontend.rope_bearing_sigma", "rope observation bearing sigma (rad)", ro, 1, false));
    k.push_back({"frontend.rope_sigma_along", "rope prior sigma along the rope (m) or 'auto'",
      [](RunConfig & c, const std::string & v) {
        if (trim(v) == "auto") {
          c.slam.frontend.rope_sigma_along.reset();
        } else {
          c.slam.frontend.rope_sigma_along = parse_positive("frontend.rope_sigma_along", v);
        }
      },
      [](const RunConfig & c) {
        const auto & s = c.slam.frontend.rope_sigma_along;
        return s ? fmt_real(*s) : std::string("auto");
      }});
    k.push_back(positive_key("frontend.rope_sigma_across", "rope prior sigma across the rope (m)", [](RunConfig & c) -> double & { return c.slam.frontend.rope_sigma_across; }));
    k.push_back(positive_key("frontend.buoy_gate", "squared Mahalanobis gate for buoys", [](RunConfig & c) -> double & { return c.slam.frontend.buoy_gate; }));
    k.push_back(positive_key("frontend.rope_gate", "squared Mahalanobis gate for ropes", [](RunConfig & c) -> double & { return c.slam.frontend.rope_gate; }));

    // solver
    k.push_back(positive_key("solver.relative_tolerance", "relative chi2 decrease to stop", [](RunConfig & c) -> double & { return c.slam.solver.relative_tolerance; }));
    k.push_back(positive_key("solver.step_tolerance", "step size to stop", [](RunConfig & c) -> double & { return c.slam.solver.step_tolerance; }));
    k.push_back({"solver.max_iterations", "iteration cap per solve",
      [](RunConfig & c, const std::string & v) {
        c.slam.solver.max_iterations = static_cast<int>(parse_integer("solver.max_iterations", v, 1, 1000000));
      },
      [](const RunConfig & c) { return std::to_string(c.slam.solver.max_iterations); }});
    k.push_back(positive_key("solver.initial_lambda", "initial damping", [](RunConfig & c) -> double & { return c.slam.solver.initial_lambda; }));
    k.push_back(real_key("solver.lambda_factor", "damping multiplier", [](RunConfig & c) -> double & { return c.slam.solver.lambda_factor; }, 1.000001, kConfigInf));
    k.push_back(positive_key("solver.max_lambda", "largest damping before giving up", [](RunConfig & c) -> double & { return c.slam.solver.max_lambda; }));

    // bench
    k.push_back({"bench.swaths", "swath counts to sweep, comma separated",
      [](RunConfig & c, const std::string & v) {
        std::vector<int> out;
        for (const auto & tok : split_list(v)) {
          out.push_back(static_cast<int>(parse_integer("bench.swaths", tok, 1, 1000)));
        }
        if (out.empty()) {
          throw ConfigError("bench.swaths: at least one entry is required");
        }
        c.bench_swaths = out;
      },
      [](const RunConfig & c) { return join(c.bench_swaths); }});
    return k;
  }();
  return keys;
}

inline const ConfigKey * find_config_key(const std::string & name)
{
  for (const auto & k : config_keys()) {
    if (k.name == name) {
      return &k;
    }
  }
  return nullptr;
}

inline void set_config_value(RunConfig & c, const std::string & name, const std::string & value)
{
  const auto * k = find_config_key(name);
  if (!k) {
    throw ConfigError("unknown configuration key '" + name + "'");
  }
  k->set(c, value);
}

/// Reads "key = value" lines grouped under "[section]" headers.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream & in)
{
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error & e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto & it : items) {
    if (it.name == "++" || it.name == "--") {
      continue;  // section markers
    }
    std::string key;
    for (const auto & p : it.parents) {
      if (p != "default") {
        key += p + ".";
      }
    }
    key += it.name;
    std::string value;
    for (std::size_t i = 0; i < it.inputs.size(); ++i) {
      value += (i ? "," : "") + it.inputs[i];
    }
    out.emplace_back(key, value);
  }
  return out;
}

inline void apply_config_file(RunConfig & c, const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  for (const auto & [k, v] : parse_config_text(in)) {
    set_config_value(c, k, v);
  }
}

/// Cross-field checks, reported against the key that has to change.
inline void validate_config(const RunConfig & c)
{
  const double ratio = c.plan.ping_rate / c.plan.pose_rate;
  if (ratio < 1.0 - 1e-12 || std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("survey.ping_rate: must be an integer multiple of survey.pose_rate");
  }
  for (std::size_t i = 1; i < c.plan.swath_offsets.size(); ++i) {
    if (c.plan.swath_offsets[i] == c.plan.swath_offsets[i - 1]) {
      throw ConfigError("survey.swath_offsets: consecutive swaths must differ");
    }
  }
  if (c.slam.frontend.rope_sigma_along && *c.slam.frontend.rope_sigma_along < c.slam.frontend.rope_sigma_across) {
    throw ConfigError("frontend.rope_sigma_along: must not be smaller than frontend.rope_sigma_across");
  }
  for (int s : c.bench_swaths) {
    if (static_cast<std::size_t>(s) > c.plan.swath_offsets.size()) {
      throw ConfigError("bench.swaths: " + std::to_string(s) + " exceeds the number of survey.swath_offsets");
    }
  }
}

/// Canonical "key = value" listing of every setting.
inline std::string dump_config(const RunConfig & c)
{
  std::string out;
  for (const auto & k : config_keys()) {
    out += k.name + " = " + k.get(c) + "\n";
  }
  return out;
}

/// Hash of everything except the method, so that runs of different methods
/// on one configuration share it.
inline std::string config_hash(const RunConfig & c)
{
  std::string text;
  for (const auto & k : config_keys()) {
    if (k.name != "method") {
      text += k.name + "=" + k.get(c) + "\n";
    }
  }
  return fnv1a_hex(text);
}

}  // namespace farmslam
