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

#ifndef HYPERCAST_CONFIG_HPP_
#define HYPERCAST_CONFIG_HPP_

#include <cstdint>
#include <nlohmann/json.hpp>

namespace hypercast
{

/// Architecture hyperparameters. Serialized into checkpoints so a reload
/// rebuilds the exact same parameter shapes.
struct ModelConfig
{
  int hidden_dim = 64;        // D
  int num_modes = 6;          // K
  int t_obs = 20;             // observed steps
  int horizon = 30;           // predicted steps N
  int hyperedge_size = 4;     // S (clamped to the agent count per scene)
  int mp_iterations = 1;      // hypergraph message-passing rounds
  double dt = 0.1;            // s
  double neighbor_radius = 50.0;  // m
  double b_floor = 1e-3;      // Laplace scale floor
  int agent_attr_dim = 4;
  int lane_attr_dim = 4;
  int stage = 1;              // 1: coarse, 2: +proposals, 3: +refinement
  uint64_t seed = 1;          // parameter init seed

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json & j);
};

}  // namespace hypercast

#endif  // HYPERCAST_CONFIG_HPP_
