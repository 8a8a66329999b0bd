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
 * @file svg.hpp
 * @brief Plain SVG plots: trajectory overlays and oRPE time series.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "farmslam/evaluation.hpp"
#include "farmslam/motion_model.hpp"
#include "farmslam/slam_runner.hpp"
#include "farmslam/survey.hpp"

namespace farmslam
{

struct Bounds
{
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();

  void add(double x, double y)
  {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  bool empty() const { return !(xmin <= xmax); }
};

/// Tick positions at 1/2/5 x 10^k spacing covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
  std::vector<double> out;
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    return out;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

/// Canvas mapping data coordinates onto a fixed pixel frame with margins.
class SvgCanvas
{
public:
  SvgCanvas(Bounds b, int width, int height, bool equal_aspect)
  : width_(width), height_(height)
  {
    if (b.empty()) {
      b = {0.0, 1.0, 0.0, 1.0};
    }
    if (b.xmax - b.xmin < 1e-9) {
      b.xmax = b.xmin + 1.0;
    }
    if (b.ymax - b.ymin < 1e-9) {
      b.ymax = b.ymin + 1.0;
    }
    const double pw = width - 2.0 * kMargin;
    const double ph = height - 2.0 * kMargin;
    sx_ = pw / (b.xmax - b.xmin);
    sy_ = ph / (b.ymax - b.ymin);
    if (equal_aspect) {
      const double s = std::min(sx_, sy_);
      const double cx = 0.5 * (b.xmin + b.xmax);
      const double cy = 0.5 * (b.ymin + b.ymax);
      sx_ = sy_ = s;
      b.xmin = cx - 0.5 * pw / s;
      b.xmax = cx + 0.5 * pw / s;
      b.ymin = cy - 0.5 * ph / s;
      b.ymax = cy + 0.5 * ph / s;
    }
    b_ = b;
  }

  double px(double x) const { return kMargin + (x - b_.xmin) * sx_; }
  double py(double y) const { return height_ - kMargin - (y - b_.ymin) * sy_; }

  void header(const std::string & title, const std::string & config_hash, std::uint64_t seed)
  {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
        << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os_ << "<desc>config_hash=" << config_hash << " seed=" << seed << "</desc>\n";
    os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os_ << "<text x=\"" << width_ / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
  }

  void axes(const std::string & xlabel, const std::string & ylabel)
  {
    const double x0 = kMargin;
    const double x1 = width_ - kMargin;
    const double y0 = height_ - kMargin;
    const double y1 = kMargin;
    os_ << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\"><rect x=\"" << x0 << "\" y=\"" << y1
        << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1 << "\"/></g>\n";
    os_ << "<g fill=\"black\">\n";
    for (double t : nice_ticks(b_.xmin, b_.xmax)) {
      const double x = px(t);
      os_ << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\"" << y0 + 5
          << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << y0 + 17 << "\" text-anchor=\"middle\">"
          << label(t) << "</text>\n";
    }
    for (double t : nice_ticks(b_.ymin, b_.ymax)) {
      const double y = py(t);
      os_ << "<line x1=\"" << x0 - 5 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\"" << y
          << "\" stroke=\"black\"/><text x=\"" << x0 - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
          << label(t) << "</text>\n";
    }
    os_ << "<text x=\"" << width_ / 2 << "\" y=\"" << height_ - 12 << "\" text-anchor=\"middle\">"
        << escape(xlabel) << "</text>\n";
    os_ << "<text x=\"14\" y=\"" << height_ / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << height_ / 2 << ")\">" << escape(ylabel) << "</text>\n";
    os_ << "</g>\n";
  }

  void polyline(std::span<const Point2> pts, const std::string & color, double width, bool dashed = false)
  {
    if (pts.empty()) {
      return;
    }
    os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"";
    if (dashed) {
      os_ << " stroke-dasharray=\"4 3\"";
    }
    os_ << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", px(pts[i].x), py(pts[i].y));
      os_ << buf;
    }
    os_ << "\"/>\n";
  }

  void circle(const Point2 & c, double r, const std::string & fill, const std::string & stroke = "none")
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\" stroke=\"%s\"/>\n",
      px(c.x), py(c.y), r, fill.c_str(), stroke.c_str());
    os_ << buf;
  }

  /// Legend entries stacked in the top-right corner.
  void legend(const std::vector<std::pair<std::string, std::string>> & entries)
  {
    double y = kMargin + 14;
    const double x = width_ - kMargin - 150;
    for (const auto & [name, color] : entries) {
      os_ << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\"" << x + 20 << "\" y2=\"" << y - 4
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << x + 26 << "\" y=\"" << y << "\">"
          << escape(name) << "</text>\n";
      y += 15;
    }
  }

  std::string finish()
  {
    os_ << "</svg>\n";
    return os_.str();
  }

  static std::string escape(const std::string & s)
  {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  }

private:
  static std::string label(double v)
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
  }

  static constexpr double kMargin = 50.0;
  int width_;
  int height_;
  double sx_ = 1.0;
  double sy_ = 1.0;
  Bounds b_;
  std::ostringstream os_;
};

/// Map view for one run: farm, dead reckoning (red), final estimate (green),
/// ground truth (dashed black) when the dataset carries it.
inline std::string trajectory_svg(const SurveyDataset & ds, const RunRecord & run)
{
  std::vector<Point2> dr;
  for (const auto & p : dr_trajectory(ds.initial_pose, ds.odometry())) {
    dr.push_back(p.translation());
  }
  std::vector<Point2> opt;
  for (const auto & p : run.final_estimate.values.poses) {
    opt.push_back(p.translation());
  }
  std::vector<Point2> truth;
  if (ds.ground_truth) {
    for (const auto & s : *ds.ground_truth) {
      truth.push_back(s.pose.translation());
    }
  }

  Bounds b;
  for (const auto * set : {&dr, &opt, &truth}) {
    for (const auto & p : *set) {
      b.add(p.x, p.y);
    }
  }
  for (const auto & buoy : ds.farm.buoys) {
    b.add(buoy.prior.mean.x, buoy.prior.mean.y);
  }
  b.xmin -= 2.0;
  b.xmax += 2.0;
  b.ymin -= 2.0;
  b.ymax += 2.0;

  SvgCanvas c(b, 800, 600, true);
  c.header(std::string("Trajectory, ") + std::string(display_name(run.method)), run.config_hash, run.seed);
  c.axes("x (m)", "y (m)");
  for (const auto & rope : ds.farm.ropes) {
    const auto * a = ds.farm.find_buoy(rope.buoy_a);
    const auto * z = ds.farm.find_buoy(rope.buoy_b);
    if (a && z) {
      const std::vector<Point2> seg{a->prior.mean, z->prior.mean};
      c.polyline(seg, "#3a6fd8", 2.0);
    }
  }
  for (const auto & p : run.final_estimate.values.ropes) {
    c.circle(p, 1.5, "#3a6fd8");
  }
  if (!truth.empty()) {
    c.polyline(truth, "black", 1.0, true);
  }
  c.polyline(dr, "#d62728", 1.5);
  c.polyline(opt, "#2ca02c", 1.5);
  for (const auto & buoy : ds.farm.buoys) {
    c.circle(buoy.prior.mean, 4.0, "none", "#ff7f0e");
  }
  for (const auto & p : run.final_estimate.values.buoys) {
    c.circle(p, 2.5, "#ff7f0e");
  }
  std::vector<std::pair<std::string, std::string>> legend{
    {"DR", "#d62728"}, {"optimized", "#2ca02c"}, {"ropes", "#3a6fd8"}, {"buoys", "#ff7f0e"}};
  if (!truth.empty()) {
    legend.insert(legend.begin(), {"truth", "black"});
  }
  c.legend(legend);
  return c.finish();
}

/// Online positional error against the final solution, one line per method.
inline std::string orpe_svg(const std::vector<MetricsReport> & reports, const std::string & config_hash,
  std::uint64_t seed)
{
  static const char * colors[] = {"#d62728", "#ff7f0e", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b"};
  Bounds b;
  for (const auto & r : reports) {
    for (const auto & [t, e] : r.orpe_series) {
      b.add(t, e);
    }
  }
  if (!b.empty()) {
    b.ymin = 0.0;
    b.ymax *= 1.05;
  }
  SvgCanvas c(b, 800, 400, false);
  c.header("Online relative pose error (position only)", config_hash, seed);
  c.axes("t (s)", "oRPE (m)");
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string color = colors[i % 6];
    std::vector<Point2> pts;
    for (const auto & [t, e] : reports[i].orpe_series) {
      pts.push_back({t, e});
    }
    c.polyline(pts, color, 1.5);
    legend.emplace_back(std::string(display_name(reports[i].method)), color);
  }
  c.legend(legend);
  return c.finish();
}

}  // namespace farmslam
