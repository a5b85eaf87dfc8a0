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

#ifndef HYPERCAST_SCENARIO_HPP_
#define HYPERCAST_SCENARIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hypercast/rng.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

enum class ScenarioKind { kStraight, kLaneChange, kMerge, kIntersection, kHeadOn };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string & name);  // InvalidSpec

/// Synthetic scene recipe. Tracks are constant-curvature arc chains with
/// Gaussian noise on the observed steps only; ground truth stays exact.
struct ScenarioSpec
{
  ScenarioKind kind = ScenarioKind::kStraight;
  int agent_count = 3;
  uint64_t seed = 1;
  double noise_std = 0.05;  // m
  double dt = 0.1;          // s
  int t_obs = 20;
  int horizon = 30;

  void validate() const;  // InvalidSpec
};

/// Deterministic per spec (same spec -> identical Scene). Every emitted
/// coordinate is snapped to a 2^-20 m grid so grid-aligned rigid shifts keep
/// relative geometry bit-exact. Speeds stay under 30 m/s and curvatures
/// under 0.2 1/m before noise.
Scene generate(const ScenarioSpec & spec);

/// One constant-curvature, constant-acceleration stretch.
struct MotionPhase
{
  int steps = 0;
  double accel = 0.0;      // m/s^2
  double curvature = 0.0;  // 1/m, positive = left
};

/// Pure arc-chain integrator: returns `total` positions starting at `start`,
/// integrating heading and speed step by step (speed clamped to [0, 30]).
/// Phases shorter than the track are padded with the last phase's curvature.
std::vector<Vec2> integrate_arcs(
  const Vec2 & start, double heading, double speed, const std::vector<MotionPhase> & phases,
  double dt, int total);

}  // namespace hypercast

#endif  // HYPERCAST_SCENARIO_HPP_
