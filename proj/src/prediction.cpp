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

#include "hypercast/prediction.hpp"

#include "hypercast/errors.hpp"

namespace hypercast
{

int AgentPrediction::top_mode() const
{
  if (modes.empty()) {
    throw EmptyPrediction("agent " + agent_id + " has no predicted modes");
  }
  int best = 0;
  for (size_t k = 1; k < modes.size(); ++k) {
    if (modes[k].confidence > modes[best].confidence) {
      best = static_cast<int>(k);
    }
  }
  return best;
}

nlohmann::json predictions_to_json(const std::vector<AgentPrediction> & preds)
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto & agent : preds) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto & mode : agent.modes) {
      nlohmann::json pts = nlohmann::json::array();
      for (int t = 0; t < mode.positions.rows(); ++t) {
        pts.push_back({mode.positions(t, 0), mode.positions(t, 1)});
      }
      modes.push_back({{"positions", std::move(pts)}, {"confidence", mode.confidence}});
    }
    j[agent.agent_id] = {{"modes", std::move(modes)}, {"frame", "world"}};
  }
  return j;
}

std::vector<AgentPrediction> predictions_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw SchemaViolation("prediction file must be a JSON object keyed by agent id");
  }
  std::vector<AgentPrediction> out;
  for (const auto & [id, entry] : j.items()) {
    AgentPrediction agent;
    agent.agent_id = id;
    if (!entry.contains("modes") || !entry["modes"].is_array()) {
      throw SchemaViolation("prediction entry missing modes array: " + id);
    }
    for (const auto & mode_j : entry["modes"]) {
      ModePrediction mode;
      const auto & pts = mode_j.at("positions");
      mode.positions.resize(static_cast<int>(pts.size()), 2);
      for (size_t t = 0; t < pts.size(); ++t) {
        mode.positions(static_cast<int>(t), 0) = pts[t].at(0).get<double>();
        mode.positions(static_cast<int>(t), 1) = pts[t].at(1).get<double>();
      }
      mode.confidence = mode_j.at("confidence").get<double>();
      agent.modes.push_back(std::move(mode));
    }
    out.push_back(std::move(agent));
  }
  return out;
}

}  // namespace hypercast
