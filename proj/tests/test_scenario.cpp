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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "hypercast/errors.hpp"
#include "hypercast/geometry.hpp"
#include "hypercast/metrics.hpp"
#include "hypercast/scenario.hpp"

namespace
{

using hypercast::Scene;
using hypercast::ScenarioKind;
using hypercast::ScenarioSpec;
using hypercast::Vec2;

ScenarioSpec spec_for(ScenarioKind kind, uint64_t seed)
{
  ScenarioSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  if (kind == ScenarioKind::kIntersection) {
    spec.agent_count = 6;
  } else if (kind == ScenarioKind::kLaneChange || kind == ScenarioKind::kMerge) {
    spec.agent_count = 4;
  }
  return spec;
}

/// Full noiseless path of an agent: observed positions plus ground truth.
std::vector<Vec2> full_path(const Scene & scene, size_t agent)
{
  std::vector<Vec2> path = scene.agents[agent].positions;
  if (const auto * gt = scene.gt_for(scene.agents[agent].id)) {
    path.insert(path.end(), gt->begin(), gt->end());
  }
  return path;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed")
{
  for (const auto kind : {ScenarioKind::kStraight, ScenarioKind::kLaneChange,
                          ScenarioKind::kMerge, ScenarioKind::kIntersection,
                          ScenarioKind::kHeadOn}) {
    const Scene a = hypercast::generate(spec_for(kind, 99));
    const Scene b = hypercast::generate(spec_for(kind, 99));
    const Scene c = hypercast::generate(spec_for(kind, 100));
    REQUIRE(a.agents.size() == b.agents.size());
    bool identical_ab = true;
    bool identical_ac = a.agents.size() == c.agents.size();
    for (size_t i = 0; i < a.agents.size(); ++i) {
      for (size_t t = 0; t < a.agents[i].positions.size(); ++t) {
        identical_ab = identical_ab && a.agents[i].positions[t] == b.agents[i].positions[t];
        if (identical_ac) {
          identical_ac = a.agents[i].positions[t] == c.agents[i].positions[t];
        }
      }
    }
    CHECK(identical_ab);
    CHECK_FALSE(identical_ac);
  }
}

TEST_CASE("noiseless paths respect speed and curvature bounds")
{
  for (const auto kind : {ScenarioKind::kStraight, ScenarioKind::kLaneChange,
                          ScenarioKind::kMerge, ScenarioKind::kIntersection,
                          ScenarioKind::kHeadOn}) {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      ScenarioSpec spec = spec_for(kind, seed);
      spec.noise_std = 0.0;
      const Scene scene = hypercast::generate(spec);
      for (size_t i = 0; i < scene.agents.size(); ++i) {
        const std::vector<Vec2> path = full_path(scene, i);
        for (size_t t = 1; t < path.size(); ++t) {
          const double speed = (path[t] - path[t - 1]).norm() / spec.dt;
          CAPTURE(static_cast<int>(kind));
          CAPTURE(seed);
          CAPTURE(i);
          CAPTURE(t);
          CHECK(speed <= 30.0 + 1e-6);
        }
        // Heading change per step bounds curvature: |dpsi| <= v dt kappa_max.
        for (size_t t = 2; t < path.size(); ++t) {
          const Vec2 d1 = path[t - 1] - path[t - 2];
          const Vec2 d2 = path[t] - path[t - 1];
          if (d1.norm() < 1e-9 || d2.norm() < 1e-9) {
            continue;
          }
          const double dpsi = std::abs(std::remainder(
            std::atan2(d2.y(), d2.x()) - std::atan2(d1.y(), d1.x()), 2.0 * M_PI));
          const double arc = d2.norm();
          // Snapping perturbs endpoints by <= 2^-20; give it slack.
          CHECK(dpsi <= 0.2 * arc + 1e-2);
        }
      }
    }
  }
}

TEST_CASE("noise perturbs only observed steps, ground truth stays exact")
{
  ScenarioSpec noiseless = spec_for(ScenarioKind::kLaneChange, 7);
  noiseless.noise_std = 0.0;
  ScenarioSpec noisy = noiseless;
  noisy.noise_std = 0.25;

  const Scene clean = hypercast::generate(noiseless);
  const Scene dirty = hypercast::generate(noisy);
  REQUIRE(clean.agents.size() == dirty.agents.size());

  double max_obs_delta = 0.0;
  for (size_t i = 0; i < clean.agents.size(); ++i) {
    for (size_t t = 0; t < clean.agents[i].positions.size(); ++t) {
      max_obs_delta = std::max(
        max_obs_delta,
        (clean.agents[i].positions[t] - dirty.agents[i].positions[t]).norm());
    }
    const auto * gt_clean = clean.gt_for(clean.agents[i].id);
    const auto * gt_dirty = dirty.gt_for(dirty.agents[i].id);
    REQUIRE((gt_clean == nullptr) == (gt_dirty == nullptr));
    if (gt_clean != nullptr) {
      for (size_t t = 0; t < gt_clean->size(); ++t) {
        CHECK((*gt_clean)[t] == (*gt_dirty)[t]);
      }
    }
  }
  CHECK(max_obs_delta > 0.05);
}

TEST_CASE("all coordinates are snapped to the grid")
{
  for (const auto kind : {ScenarioKind::kMerge, ScenarioKind::kIntersection}) {
    const Scene scene = hypercast::generate(spec_for(kind, 3));
    const auto on_grid = [](double x) { return hypercast::snap_to_grid(x) == x; };
    for (const auto & agent : scene.agents) {
      for (const Vec2 & p : agent.positions) {
        CHECK(on_grid(p.x()));
        CHECK(on_grid(p.y()));
      }
    }
    for (const auto & [id, gt] : scene.ground_truth) {
      for (const Vec2 & p : gt) {
        CHECK(on_grid(p.x()));
        CHECK(on_grid(p.y()));
      }
    }
    for (const auto & lane : scene.lanes) {
      CHECK(on_grid(lane.start.x()));
      CHECK(on_grid(lane.end.y()));
    }
  }
}

TEST_CASE("scenario kinds map to their interaction buckets across seeds")
{
  int slight = 0;
  int moderate = 0;
  int strong = 0;
  const int trials = 30;
  for (uint64_t seed = 1; seed <= trials; ++seed) {
    ScenarioSpec s = spec_for(ScenarioKind::kStraight, seed);
    s.agent_count = 3;
    if (hypercast::interaction_level(hypercast::generate(s)) ==
        hypercast::InteractionLevel::kSlight) {
      ++slight;
    }
    if (hypercast::interaction_level(hypercast::generate(
          spec_for(ScenarioKind::kLaneChange, seed))) ==
        hypercast::InteractionLevel::kModerate) {
      ++moderate;
    }
    if (hypercast::interaction_level(hypercast::generate(
          spec_for(ScenarioKind::kIntersection, seed))) ==
        hypercast::InteractionLevel::kStrong) {
      ++strong;
    }
  }
  CHECK(slight == trials);
  CHECK(moderate == trials);
  CHECK(strong == trials);
}

TEST_CASE("generated scenes validate and expose usable structure")
{
  for (const auto kind : {ScenarioKind::kStraight, ScenarioKind::kLaneChange,
                          ScenarioKind::kMerge, ScenarioKind::kIntersection,
                          ScenarioKind::kHeadOn}) {
    const Scene scene = hypercast::generate(spec_for(kind, 21));
    CHECK_NOTHROW(scene.validate());
    CHECK(scene.t_obs() == 20);
    CHECK(scene.gt_for(scene.agents.front().id) != nullptr);
    CHECK(scene.gt_for(scene.agents.front().id)->size() == 30);
    CHECK(!scene.lanes.empty());
  }
}

TEST_CASE("invalid specs are rejected")
{
  ScenarioSpec bad = spec_for(ScenarioKind::kHeadOn, 1);
  bad.agent_count = 1;
  CHECK_THROWS_AS(hypercast::generate(bad), hypercast::InvalidSpec);

  ScenarioSpec short_obs = spec_for(ScenarioKind::kStraight, 1);
  short_obs.t_obs = 1;
  CHECK_THROWS_AS(hypercast::generate(short_obs), hypercast::InvalidSpec);

  CHECK_THROWS_AS(hypercast::scenario_kind_from_string("zigzag"), hypercast::InvalidSpec);
  CHECK(
    hypercast::scenario_kind_from_string("merge") == ScenarioKind::kMerge);
  CHECK(hypercast::to_string(ScenarioKind::kHeadOn) == "head_on");
}
