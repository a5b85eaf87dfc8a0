// Copyright 2026 The Hypercast Authors
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

#include "hypercast/svg.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "hypercast/errors.hpp"

namespace hypercast
{

SvgCanvas::SvgCanvas(int width_px, int height_px) : width_(width_px), height_(height_px)
{
  set_view(0.0, 0.0, 1.0, 1.0);
}

void SvgCanvas::set_view(double min_x, double min_y, double max_x, double max_y)
{
  constexpr double kMargin = 0.05;
  const double span_x = std::max(max_x - min_x, 1e-6);
  const double span_y = std::max(max_y - min_y, 1e-6);
  const double pad_x = span_x * kMargin;
  const double pad_y = span_y * kMargin;
  world_min_ = Vec2(min_x - pad_x, min_y - pad_y);
  world_max_ = Vec2(max_x + pad_x, max_y + pad_y);
  scale_ = std::min(
    width_ / (world_max_.x() - world_min_.x()), height_ / (world_max_.y() - world_min_.y()));
}

Vec2 SvgCanvas::to_px(const Vec2 & world) const
{
  const double x = (world.x() - world_min_.x()) * scale_;
  const double y = height_ - (world.y() - world_min_.y()) * scale_;
  return Vec2(x, y);
}

namespace
{

std::string fmt(double v)
{
  std::ostringstream ss;
  ss.precision(2);
  ss << std::fixed << v;
  return ss.str();
}

}  // namespace

void SvgCanvas::polyline(
  const std::vector<Vec2> & points, const std::string & color, double width, double opacity,
  bool dashed)
{
  if (points.size() < 2) {
    return;
  }
  std::ostringstream ss;
  ss << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width)
     << "\" stroke-opacity=\"" << fmt(opacity) << "\"";
  if (dashed) {
    ss << " stroke-dasharray=\"6 4\"";
  }
  ss << " points=\"";
  for (const Vec2 & p : points) {
    const Vec2 px = to_px(p);
    ss << fmt(px.x()) << ',' << fmt(px.y()) << ' ';
  }
  ss << "\"/>";
  elements_.push_back(ss.str());
}

void SvgCanvas::circle(
  const Vec2 & center, double radius_px, const std::string & color, double opacity)
{
  const Vec2 px = to_px(center);
  std::ostringstream ss;
  ss << "<circle cx=\"" << fmt(px.x()) << "\" cy=\"" << fmt(px.y()) << "\" r=\""
     << fmt(radius_px) << "\" fill=\"" << color << "\" fill-opacity=\"" << fmt(opacity)
     << "\"/>";
  elements_.push_back(ss.str());
}

void SvgCanvas::text(
  const Vec2 & anchor, const std::string & content, int size_px, const std::string & color)
{
  const Vec2 px = to_px(anchor);
  text_px(px.x(), px.y(), content, size_px, color);
}

void SvgCanvas::bar_px(double x, double y, double w, double h, const std::string & color)
{
  std::ostringstream ss;
  ss << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
     << "\" height=\"" << fmt(h) << "\" fill=\"" << color << "\"/>";
  elements_.push_back(ss.str());
}

void SvgCanvas::text_px(
  double x, double y, const std::string & content, int size_px, const std::string & color)
{
  std::ostringstream ss;
  ss << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size_px
     << "\" font-family=\"sans-serif\" fill=\"" << color << "\">" << content << "</text>";
  elements_.push_back(ss.str());
}

void SvgCanvas::write(const std::string & path) const
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const std::string & el : elements_) {
    out << el << '\n';
  }
  out << "</svg>\n";
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

namespace
{

struct Bounds
{
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Vec2 & p)
  {
    min_x = std::min(min_x, p.x());
    min_y = std::min(min_y, p.y());
    max_x = std::max(max_x, p.x());
    max_y = std::max(max_y, p.y());
  }
};

}  // namespace

void plot_scene_predictions(
  const Scene & scene, const std::vector<AgentPrediction> & preds, const std::string & path)
{
  Bounds bounds;
  for (const AgentTrack & track : scene.agents) {
    for (const Vec2 & p : track.positions) {
      bounds.add(p);
    }
  }
  for (const auto & [id, future] : scene.ground_truth) {
    for (const Vec2 & p : future) {
      bounds.add(p);
    }
  }
  for (const AgentPrediction & ap : preds) {
    for (const ModePrediction & mode : ap.modes) {
      for (Eigen::Index t = 0; t < mode.positions.rows(); ++t) {
        bounds.add(Vec2(mode.positions(t, 0), mode.positions(t, 1)));
      }
    }
  }

  SvgCanvas canvas(900, 900);
  canvas.set_view(bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y);

  for (const LaneSegment & lane : scene.lanes) {
    canvas.polyline({lane.start, lane.end}, "#bbbbbb", 1.5, 1.0, true);
  }
  for (size_t i = 0; i < scene.agents.size(); ++i) {
    const AgentTrack & track = scene.agents[i];
    canvas.polyline(track.positions, i == 0 ? "#222222" : "#777777", 2.0);
    canvas.circle(track.positions.back(), 4.0, i == 0 ? "#222222" : "#777777");
    if (const std::vector<Vec2> * gt = scene.gt_for(track.id)) {
      std::vector<Vec2> line = {track.positions.back()};
      line.insert(line.end(), gt->begin(), gt->end());
      canvas.polyline(line, "#2ca02c", 2.0);
    }
  }

  // Central agent's modes only, to keep the overlay readable.
  if (!preds.empty() && !scene.agents.empty()) {
    for (const AgentPrediction & ap : preds) {
      if (ap.agent_id != scene.agents.front().id) {
        continue;
      }
      for (const ModePrediction & mode : ap.modes) {
        std::vector<Vec2> line = {scene.agents.front().positions.back()};
        for (Eigen::Index t = 0; t < mode.positions.rows(); ++t) {
          line.emplace_back(mode.positions(t, 0), mode.positions(t, 1));
        }
        canvas.polyline(line, "#1f77b4", 1.6, std::max(0.25, mode.confidence));
      }
    }
  }
  canvas.write(path);
}

void plot_plan_comparison(
  const PlannerProblem & problem, const Eigen::MatrixXd & before, const Eigen::MatrixXd & after,
  const std::string & path)
{
  Bounds bounds;
  bounds.add(problem.ego0.position);
  const auto add_matrix = [&](const Eigen::MatrixXd & m) {
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
      bounds.add(Vec2(m(t, 0), m(t, 1)));
    }
  };
  add_matrix(before);
  add_matrix(after);
  for (const Eigen::MatrixXd & nbr : problem.neighbors) {
    add_matrix(nbr);
  }
  for (const Vec2 & p : problem.lane_ref) {
    bounds.add(p);
  }

  SvgCanvas canvas(900, 600);
  canvas.set_view(bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y);

  canvas.polyline(problem.lane_ref, "#bbbbbb", 1.5, 1.0, true);
  const auto to_line = [&](const Eigen::MatrixXd & m) {
    std::vector<Vec2> line = {problem.ego0.position};
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
      line.emplace_back(m(t, 0), m(t, 1));
    }
    return line;
  };
  for (const Eigen::MatrixXd & nbr : problem.neighbors) {
    std::vector<Vec2> line;
    for (Eigen::Index t = 0; t < nbr.rows(); ++t) {
      line.emplace_back(nbr(t, 0), nbr(t, 1));
    }
    canvas.polyline(line, "#d62728", 2.0);
    if (!line.empty()) {
      canvas.circle(line.front(), 4.0, "#d62728");
    }
  }
  canvas.polyline(to_line(before), "#ff7f0e", 2.0, 1.0, true);
  canvas.polyline(to_line(after), "#1f77b4", 2.5);
  canvas.circle(problem.ego0.position, 5.0, "#1f77b4");
  canvas.write(path);
}

void plot_bucket_bars(const MetricReport & report, const std::string & path)
{
  SvgCanvas canvas(600, 400);
  const std::vector<std::string> order = {"slight", "moderate", "strong"};
  double max_v = 1e-9;
  for (const std::string & name : order) {
    const auto it = report.buckets.find(name);
    if (it != report.buckets.end()) {
      max_v = std::max(max_v, it->second.min_fde);
    }
  }

  const double chart_h = 320.0;
  const double base_y = 360.0;
  double x = 80.0;
  for (const std::string & name : order) {
    const auto it = report.buckets.find(name);
    const double v = it != report.buckets.end() ? it->second.min_fde : 0.0;
    const double h = chart_h * v / max_v;
    canvas.bar_px(x, base_y - h, 100.0, h, "#1f77b4");
    canvas.text_px(x, base_y + 20.0, name, 14, "#222222");
    std::ostringstream label;
    label.precision(3);
    label << std::fixed << v;
    canvas.text_px(x, base_y - h - 6.0, label.str(), 13, "#222222");
    x += 160.0;
  }
  canvas.text_px(80.0, 24.0, "endpoint error by interaction level (m)", 15, "#222222");
  canvas.write(path);
}

}  // namespace hypercast
