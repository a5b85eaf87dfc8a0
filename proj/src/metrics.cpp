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

#include "hypercast/metrics.hpp"

#include <cmath>
#include <limits>

#include "hypercast/errors.hpp"
#include "hypercast/geometry.hpp"

namespace hypercast
{

namespace
{

int mode_count(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  if (n == 0 || preds.rows() == 0) {
    throw EmptyPrediction("metrics: no modes or empty ground truth");
  }
  if (preds.rows() % n != 0 || preds.cols() != 2 || gt.cols() != 2) {
    throw ShapeMismatch("metrics: pred must stack modes of the gt length");
  }
  return static_cast<int>(preds.rows()) / n;
}

}  // namespace

double min_ade(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const int k = mode_count(preds, gt);
  double best = std::numeric_limits<double>::infinity();
  for (int mode = 0; mode < k; ++mode) {
    double sum = 0.0;
    for (int t = 0; t < n; ++t) {
      sum += (preds.row(mode * n + t) - gt.row(t)).norm();
    }
    best = std::min(best, sum / n);
  }
  return best;
}

double min_fde(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const int k = mode_count(preds, gt);
  double best = std::numeric_limits<double>::infinity();
  for (int mode = 0; mode < k; ++mode) {
    best = std::min(best, (preds.row(mode * n + n - 1) - gt.row(n - 1)).norm());
  }
  return best;
}

int endpoint_best_mode(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const int k = mode_count(preds, gt);
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int mode = 0; mode < k; ++mode) {
    const double err = (preds.row(mode * n + n - 1) - gt.row(n - 1)).norm();
    if (err < best_err) {
      best_err = err;
      best = mode;
    }
  }
  return best;
}

double brier_min_fde(
  const Eigen::MatrixXd & preds, const Eigen::VectorXd & pi, const Eigen::MatrixXd & gt)
{
  const int k_fde = endpoint_best_mode(preds, gt);
  const double gap = 1.0 - pi(k_fde);
  return min_fde(preds, gt) + gap * gap;
}

double miss_rate(const std::vector<double> & fdes)
{
  if (fdes.empty()) {
    throw EmptyBatch("miss_rate: empty batch");
  }
  int misses = 0;
  for (const double fde : fdes) {
    if (fde > kMissThreshold) {
      ++misses;
    }
  }
  return static_cast<double>(misses) / static_cast<double>(fdes.size());
}

std::string to_string(InteractionLevel level)
{
  switch (level) {
    case InteractionLevel::kSlight:
      return "slight";
    case InteractionLevel::kModerate:
      return "moderate";
    default:
      return "strong";
  }
}

namespace
{

constexpr double kNearbyRadius = 30.0;          // m
constexpr double kSlightTurn = 15.0 * M_PI / 180.0;
constexpr double kStrongTurn = 30.0 * M_PI / 180.0;

/// Largest absolute heading deviation from the initial future heading.
/// Headings come from consecutive ground-truth displacements; near-zero
/// displacements carry no heading and are skipped.
double max_heading_change(const std::vector<Vec2> & future)
{
  double first = std::numeric_limits<double>::quiet_NaN();
  double worst = 0.0;
  for (size_t t = 1; t < future.size(); ++t) {
    const Vec2 d = future[t] - future[t - 1];
    if (d.norm() < 1e-6) {
      continue;
    }
    const double heading = std::atan2(d.y(), d.x());
    if (std::isnan(first)) {
      first = heading;
      continue;
    }
    worst = std::max(worst, std::abs(wrap_angle(heading - first)));
  }
  return worst;
}

}  // namespace

InteractionLevel interaction_level(const Scene & scene)
{
  scene.validate();
  const AgentTrack & central = scene.agents.front();
  const Vec2 center = central.positions.back();

  int nearby = 0;
  double worst_turn = 0.0;
  if (const std::vector<Vec2> * gt = scene.gt_for(central.id)) {
    worst_turn = max_heading_change(*gt);
  }
  for (size_t j = 1; j < scene.agents.size(); ++j) {
    const AgentTrack & other = scene.agents[j];
    if ((other.positions.back() - center).norm() > kNearbyRadius) {
      continue;
    }
    ++nearby;
    if (const std::vector<Vec2> * gt = scene.gt_for(other.id)) {
      worst_turn = std::max(worst_turn, max_heading_change(*gt));
    }
  }

  if (nearby <= 2 && worst_turn < kSlightTurn) {
    return InteractionLevel::kSlight;
  }
  if (nearby >= 5 && worst_turn >= kStrongTurn) {
    return InteractionLevel::kStrong;
  }
  return InteractionLevel::kModerate;
}

SceneEval evaluate_scene(const std::vector<AgentPrediction> & preds, const Scene & scene)
{
  const AgentTrack & central = scene.agents.front();
  const std::vector<Vec2> * gt = scene.gt_for(central.id);
  if (gt == nullptr) {
    throw NoGroundTruth("evaluate_scene: central agent has no future");
  }

  const AgentPrediction * ap = nullptr;
  for (const AgentPrediction & p : preds) {
    if (p.agent_id == central.id) {
      ap = &p;
      break;
    }
  }
  if (ap == nullptr || ap->modes.empty()) {
    throw EmptyPrediction("evaluate_scene: no prediction for the central agent");
  }

  const int n = static_cast<int>(gt->size());
  const int k = static_cast<int>(ap->modes.size());
  Eigen::MatrixXd stacked(k * n, 2);
  Eigen::VectorXd pi(k);
  for (int mode = 0; mode < k; ++mode) {
    stacked.block(mode * n, 0, n, 2) = ap->modes[mode].positions;
    pi(mode) = ap->modes[mode].confidence;
  }
  Eigen::MatrixXd gt_mat(n, 2);
  for (int t = 0; t < n; ++t) {
    gt_mat.row(t) = (*gt)[t].transpose();
  }

  SceneEval ev;
  ev.ade = min_ade(stacked, gt_mat);
  ev.fde = min_fde(stacked, gt_mat);
  ev.brier = brier_min_fde(stacked, pi, gt_mat);
  ev.miss = ev.fde > kMissThreshold;
  ev.level = interaction_level(scene);
  return ev;
}

MetricReport aggregate(const std::vector<SceneEval> & evals)
{
  if (evals.empty()) {
    throw EmptyBatch("aggregate: no evaluations");
  }

  const auto fold = [](MetricValues & acc, const SceneEval & ev) {
    acc.min_ade += ev.ade;
    acc.min_fde += ev.fde;
    acc.brier_min_fde += ev.brier;
    acc.miss_rate += ev.miss ? 1.0 : 0.0;
    ++acc.count;
  };
  const auto finish = [](MetricValues & acc) {
    if (acc.count > 0) {
      acc.min_ade /= acc.count;
      acc.min_fde /= acc.count;
      acc.brier_min_fde /= acc.count;
      acc.miss_rate /= acc.count;
    }
  };

  MetricReport report;
  for (const SceneEval & ev : evals) {
    fold(report.overall, ev);
    fold(report.buckets[to_string(ev.level)], ev);
  }
  finish(report.overall);
  for (auto & [name, values] : report.buckets) {
    finish(values);
  }
  return report;
}

nlohmann::json report_to_json(const MetricReport & report)
{
  const auto values_json = [](const MetricValues & v) {
    return nlohmann::json{
      {"min_ade", v.min_ade},
      {"min_fde", v.min_fde},
      {"miss_rate", v.miss_rate},
      {"brier_min_fde", v.brier_min_fde},
      {"count", v.count},
    };
  };
  nlohmann::json buckets = nlohmann::json::object();
  for (const auto & [name, values] : report.buckets) {
    buckets[name] = values_json(values);
  }
  return nlohmann::json{{"overall", values_json(report.overall)}, {"buckets", buckets}};
}

}  // namespace hypercast
