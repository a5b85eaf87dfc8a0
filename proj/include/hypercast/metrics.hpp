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

#ifndef HYPERCAST_METRICS_HPP_
#define HYPERCAST_METRICS_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercast/prediction.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// Prediction sets stack the K modes as (K*N) x 2 rows; gt is N x 2 in the
/// same (world) frame. Throws EmptyPrediction when no mode is present.

/// min over modes of the mean per-step Euclidean error.
double min_ade(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt);

/// min over modes of the endpoint Euclidean error.
double min_fde(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt);

/// Index of the endpoint-minimizing mode (ties -> smallest index).
int endpoint_best_mode(const Eigen::MatrixXd & preds, const Eigen::MatrixXd & gt);

/// min_fde + (1 - pi[k])^2 with k the endpoint-minimizing mode.
double brier_min_fde(
  const Eigen::MatrixXd & preds, const Eigen::VectorXd & pi, const Eigen::MatrixXd & gt);

/// Fraction of endpoint errors strictly above 2.0 m (2.0 exactly is a hit).
/// Throws EmptyBatch.
double miss_rate(const std::vector<double> & fdes);

constexpr double kMissThreshold = 2.0;  // m

/// Qualitative interaction intensity of a scene, judged from the central
/// agent's surroundings. The numeric thresholds (30 m neighborhood, 15 and
/// 30 degree heading change, 2/5 neighbor cutoffs) are this implementation's
/// operationalization of the qualitative levels; they are not taken from any
/// external definition.
enum class InteractionLevel { kSlight, kModerate, kStrong };

std::string to_string(InteractionLevel level);

InteractionLevel interaction_level(const Scene & scene);

/// One scene's central-agent evaluation.
struct SceneEval
{
  double ade = 0.0;
  double fde = 0.0;
  double brier = 0.0;
  bool miss = false;
  InteractionLevel level = InteractionLevel::kModerate;
};

/// Evaluates the scene's central (first) agent. Throws NoGroundTruth when it
/// has no future, UnknownAgent when predictions lack it.
SceneEval evaluate_scene(const std::vector<AgentPrediction> & preds, const Scene & scene);

struct MetricValues
{
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  double brier_min_fde = 0.0;
  int count = 0;
};

/// Batch means plus per-interaction-level sub-reports.
struct MetricReport
{
  MetricValues overall;
  std::map<std::string, MetricValues> buckets;
};

MetricReport aggregate(const std::vector<SceneEval> & evals);

nlohmann::json report_to_json(const MetricReport & report);

}  // namespace hypercast

#endif  // HYPERCAST_METRICS_HPP_
