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

#include "hypercast/config.hpp"

#include <set>
#include <string>

#include "hypercast/errors.hpp"

namespace hypercast
{

void ModelConfig::validate() const
{
  if (hidden_dim < 2 || hidden_dim % 2 != 0) {
    throw ConfigError("hidden_dim must be even and >= 2 (bi-directional encoder splits it)");
  }
  if (num_modes < 1 || t_obs < 2 || horizon < 1) {
    throw ConfigError("num_modes >= 1, t_obs >= 2, horizon >= 1 required");
  }
  if (hyperedge_size < 1) {
    throw ConfigError("hyperedge_size must be >= 1");
  }
  if (mp_iterations < 1) {
    throw ConfigError("mp_iterations must be >= 1");
  }
  if (dt <= 0.0 || neighbor_radius <= 0.0 || b_floor <= 0.0) {
    throw ConfigError("dt, neighbor_radius, b_floor must be positive");
  }
  if (agent_attr_dim < 0 || lane_attr_dim < 0) {
    throw ConfigError("attribute dims must be non-negative");
  }
  if (stage < 1 || stage > 3) {
    throw ConfigError("stage must be 1, 2, or 3");
  }
}

nlohmann::json ModelConfig::to_json() const
{
  return nlohmann::json{
    {"hidden_dim", hidden_dim},
    {"num_modes", num_modes},
    {"t_obs", t_obs},
    {"horizon", horizon},
    {"hyperedge_size", hyperedge_size},
    {"mp_iterations", mp_iterations},
    {"dt", dt},
    {"neighbor_radius", neighbor_radius},
    {"b_floor", b_floor},
    {"agent_attr_dim", agent_attr_dim},
    {"lane_attr_dim", lane_attr_dim},
    {"stage", stage},
    {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json & j)
{
  static const std::set<std::string> allowed = {
    "hidden_dim", "num_modes", "t_obs", "horizon", "hyperedge_size", "mp_iterations",
    "dt", "neighbor_radius", "b_floor", "agent_attr_dim", "lane_attr_dim", "stage", "seed"};
  if (!j.is_object()) {
    throw ConfigError("model config must be a JSON object");
  }
  for (const auto & [key, value] : j.items()) {
    if (allowed.count(key) == 0) {
      throw ConfigError("unknown model config key: " + key);
    }
  }
  ModelConfig cfg;
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.num_modes = j.value("num_modes", cfg.num_modes);
  cfg.t_obs = j.value("t_obs", cfg.t_obs);
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.hyperedge_size = j.value("hyperedge_size", cfg.hyperedge_size);
  cfg.mp_iterations = j.value("mp_iterations", cfg.mp_iterations);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.neighbor_radius = j.value("neighbor_radius", cfg.neighbor_radius);
  cfg.b_floor = j.value("b_floor", cfg.b_floor);
  cfg.agent_attr_dim = j.value("agent_attr_dim", cfg.agent_attr_dim);
  cfg.lane_attr_dim = j.value("lane_attr_dim", cfg.lane_attr_dim);
  cfg.stage = j.value("stage", cfg.stage);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace hypercast
