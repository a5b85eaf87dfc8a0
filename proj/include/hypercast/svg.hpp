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

#ifndef HYPERCAST_SVG_HPP_
#define HYPERCAST_SVG_HPP_

#include <map>
#include <string>
#include <vector>

#include "hypercast/geometry.hpp"
#include "hypercast/metrics.hpp"
#include "hypercast/planner.hpp"
#include "hypercast/prediction.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// Tiny SVG writer over world coordinates (y up; flipped on emission).
class SvgCanvas
{
public:
  SvgCanvas(int width_px, int height_px);

  /// World window mapped onto the canvas, preserving aspect ratio.
  void set_view(double min_x, double min_y, double max_x, double max_y);

  void polyline(
    const std::vector<Vec2> & points, const std::string & color, double width,
    double opacity = 1.0, bool dashed = false);
  void circle(const Vec2 & center, double radius_px, const std::string & color,
              double opacity = 1.0);
  void text(const Vec2 & anchor, const std::string & content, int size_px,
            const std::string & color);
  /// Axis-aligned bar in pixel coordinates (for charts).
  void bar_px(double x, double y, double w, double h, const std::string & color);
  void text_px(double x, double y, const std::string & content, int size_px,
               const std::string & color);

  void write(const std::string & path) const;  // IoError

private:
  Vec2 to_px(const Vec2 & world) const;

  int width_;
  int height_;
  double scale_ = 1.0;
  Vec2 world_min_ = Vec2::Zero();
  Vec2 world_max_ = Vec2::Zero();
  std::vector<std::string> elements_;
};

/// Observed tracks, lanes, ground truth and the K predicted modes of the
/// central agent (mode opacity follows confidence).
void plot_scene_predictions(
  const Scene & scene, const std::vector<AgentPrediction> & preds, const std::string & path);

/// Initial vs optimized plan over the predicted neighbors.
void plot_plan_comparison(
  const PlannerProblem & problem, const Eigen::MatrixXd & before,
  const Eigen::MatrixXd & after, const std::string & path);

/// Per-bucket metric bar chart.
void plot_bucket_bars(const MetricReport & report, const std::string & path);

}  // namespace hypercast

#endif  // HYPERCAST_SVG_HPP_
