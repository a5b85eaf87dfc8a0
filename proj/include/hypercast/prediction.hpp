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

#ifndef HYPERCAST_PREDICTION_HPP_
#define HYPERCAST_PREDICTION_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hypercast
{

struct ModePrediction
{
  Eigen::MatrixXd positions;  // N x 2, world frame
  double confidence = 0.0;
};

struct AgentPrediction
{
  std::string agent_id;
  std::vector<ModePrediction> modes;

  /// Index of the highest-confidence mode (ties -> smallest index).
  int top_mode() const;
};

nlohmann::json predictions_to_json(const std::vector<AgentPrediction> & preds);
std::vector<AgentPrediction> predictions_from_json(const nlohmann::json & j);

}  // namespace hypercast

#endif  // HYPERCAST_PREDICTION_HPP_
