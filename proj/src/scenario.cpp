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

#include "hypercast/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "hypercast/errors.hpp"
#include "hypercast/geometry.hpp"

namespace hypercast
{

std::string to_string(ScenarioKind kind)
{
  switch (kind) {
    case ScenarioKind::kStraight:
      return "straight";
    case ScenarioKind::kLaneChange:
      return "lane_change";
    case ScenarioKind::kMerge:
      return "merge";
    case ScenarioKind::kIntersection:
      return "intersection";
    default:
      return "head_on";
  }
}

ScenarioKind scenario_kind_from_string(const std::string & name)
{
  if (name == "straight") return ScenarioKind::kStraight;
  if (name == "lane_change") return ScenarioKind::kLaneChange;
  if (name == "merge") return ScenarioKind::kMerge;
  if (name == "intersection") return ScenarioKind::kIntersection;
  if (name == "head_on") return ScenarioKind::kHeadOn;
  throw InvalidSpec("unknown scenario kind: " + name);
}

void ScenarioSpec::validate() const
{
  if (agent_count < 1) {
    throw InvalidSpec("agent_count must be >= 1");
  }
  if (kind == ScenarioKind::kHeadOn && agent_count < 2) {
    throw InvalidSpec("head_on needs at least two agents");
  }
  if (noise_std < 0.0) {
    throw InvalidSpec("noise_std must be >= 0");
  }
  if (dt <= 0.0) {
    throw InvalidSpec("dt must be positive");
  }
  if (t_obs < 2 || horizon < 1) {
    throw InvalidSpec("need t_obs >= 2 and horizon >= 1");
  }
}

namespace
{

constexpr double kMaxSpeed = 30.0;
constexpr double kMaxCurvature = 0.2;
constexpr double kLaneWidth = 3.5;

struct AgentPlan
{
  Vec2 start = Vec2::Zero();
  double heading = 0.0;
  double speed = 0.0;
  std::vector<MotionPhase> phases;
};

double kind_code(ScenarioKind kind)
{
  return static_cast<double>(static_cast<int>(kind)) / 4.0;
}

/// A 90 degree turn as one arc, sized so curvature stays under the bound.
std::vector<MotionPhase> turn_phases(int onset, double speed, double dt, int sign)
{
  const int steps = std::max(
    16, static_cast<int>(std::ceil((M_PI / 2.0) / (speed * dt * (kMaxCurvature - 0.01)))));
  const double kappa = sign * (M_PI / 2.0) / (speed * dt * steps);
  return {{onset, 0.0, 0.0}, {steps, 0.0, kappa}, {1000, 0.0, 0.0}};
}

std::vector<AgentPlan> make_plans(const ScenarioSpec & spec, Rng & rng)
{
  const int total = spec.t_obs + spec.horizon;
  std::vector<AgentPlan> plans;
  plans.reserve(spec.agent_count);

  switch (spec.kind) {
    case ScenarioKind::kStraight: {
      // Speed range matches the interactive kinds so the interaction buckets
      // compare scenes of similar travel, not faster versus slower ones.
      AgentPlan central;
      central.speed = rng.uniform(8.0, 12.0);
      central.phases = {{total, 0.0, 0.0}};
      plans.push_back(central);
      for (int j = 1; j < spec.agent_count; ++j) {
        AgentPlan nbr;
        const double side = (j % 2 == 1) ? 1.0 : -1.0;
        nbr.start = Vec2(rng.uniform(-15.0, 15.0), side * kLaneWidth * ((j + 1) / 2));
        nbr.speed = rng.uniform(8.0, 12.0);
        nbr.phases = {{total, 0.0, 0.0}};
        plans.push_back(nbr);
      }
      break;
    }
    case ScenarioKind::kLaneChange: {
      AgentPlan central;
      central.speed = rng.uniform(8.0, 12.0);
      const int onset = spec.t_obs + rng.uniform_int(9) - 6;  // [t_obs-6, t_obs+2]
      const double kappa = rng.uniform(0.04, 0.06);
      // Arc in, straight diagonal, arc out: net lateral shift of about one
      // lane width at these speeds.
      central.phases = {
        {onset, 0.0, 0.0}, {4, 0.0, kappa}, {13, 0.0, 0.0}, {4, 0.0, -kappa}, {1000, 0.0, 0.0}};
      plans.push_back(central);
      for (int j = 1; j < spec.agent_count; ++j) {
        AgentPlan nbr;
        const double lanes[] = {kLaneWidth, -kLaneWidth, 0.0};
        nbr.start = Vec2(
          rng.uniform(-12.0, 12.0) + ((j - 1) % 3 == 2 ? -12.0 : 0.0), lanes[(j - 1) % 3]);
        nbr.speed = central.speed + rng.uniform(-2.0, 2.0);
        nbr.phases = {{total, 0.0, 0.0}};
        plans.push_back(nbr);
      }
      break;
    }
    case ScenarioKind::kMerge: {
      AgentPlan central;
      central.speed = rng.uniform(8.0, 12.0);
      central.start = Vec2(0.0, -6.0);
      central.heading = 0.25;
      const int onset = spec.t_obs + rng.uniform_int(9) - 6;
      const int align = 12;
      central.phases = {
        {onset, 0.0, 0.0}, {align, 0.0, -0.25 / (central.speed * spec.dt * align)},
        {1000, 0.0, 0.0}};
      plans.push_back(central);
      for (int j = 1; j < spec.agent_count; ++j) {
        AgentPlan nbr;
        const double lanes[] = {0.0, kLaneWidth, 2.0 * kLaneWidth};
        nbr.start = Vec2(rng.uniform(-12.0, 12.0), lanes[(j - 1) % 3]);
        nbr.speed = central.speed + rng.uniform(-2.0, 2.0);
        nbr.phases = {{total, 0.0, 0.0}};
        plans.push_back(nbr);
      }
      break;
    }
    case ScenarioKind::kIntersection: {
      AgentPlan central;
      central.speed = rng.uniform(5.0, 7.0);
      const int onset = spec.t_obs - 6 + rng.uniform_int(9);  // [t_obs-6, t_obs+2]
      // Reach the crossing point right at turn onset.
      central.start = Vec2(-central.speed * spec.dt * onset, -kLaneWidth / 2.0);
      central.phases = turn_phases(onset, central.speed, spec.dt, rng.uniform() < 0.5 ? 1 : -1);
      plans.push_back(central);
      for (int j = 1; j < spec.agent_count; ++j) {
        AgentPlan nbr;
        const double arm = (M_PI / 2.0) * (1 + (j - 1) % 3);  // +90, 180, -90 degrees
        nbr.speed = rng.uniform(4.0, 7.0);
        nbr.heading = wrap_angle(arm);
        const double dist = nbr.speed * spec.dt * spec.t_obs + rng.uniform(-8.0, 8.0);
        const Vec2 dir(std::cos(nbr.heading), std::sin(nbr.heading));
        const Vec2 right(dir.y(), -dir.x());
        nbr.start = -dist * dir + (kLaneWidth / 2.0) * right;
        if (rng.uniform() < 0.5) {
          nbr.phases = turn_phases(
            spec.t_obs - 4 + rng.uniform_int(9), nbr.speed, spec.dt,
            rng.uniform() < 0.5 ? 1 : -1);
        } else {
          nbr.phases = {{total, 0.0, 0.0}};
        }
        plans.push_back(nbr);
      }
      break;
    }
    case ScenarioKind::kHeadOn: {
      AgentPlan central;
      central.speed = rng.uniform(6.0, 9.0);
      central.phases = {{total, 0.0, 0.0}};
      plans.push_back(central);
      AgentPlan other;
      other.speed = rng.uniform(6.0, 9.0);
      other.start = Vec2(rng.uniform(30.0, 45.0), rng.uniform(-0.3, 0.3));
      other.heading = M_PI;
      other.phases = {{total, 0.0, 0.0}};
      plans.push_back(other);
      for (int j = 2; j < spec.agent_count; ++j) {
        AgentPlan extra;
        extra.start = Vec2(rng.uniform(-15.0, 15.0), kLaneWidth * (1 + (j - 2) % 2));
        extra.speed = rng.uniform(6.0, 9.0);
        extra.phases = {{total, 0.0, 0.0}};
        plans.push_back(extra);
      }
      break;
    }
  }
  return plans;
}

Vec2 snapped(const Vec2 & p)
{
  return Vec2(snap_to_grid(p.x()), snap_to_grid(p.y()));
}

}  // namespace

std::vector<Vec2> integrate_arcs(
  const Vec2 & start, double heading, double speed, const std::vector<MotionPhase> & phases,
  double dt, int total)
{
  std::vector<Vec2> out;
  out.reserve(total);
  out.push_back(start);

  Vec2 pos = start;
  double h = heading;
  double v = std::clamp(speed, 0.0, kMaxSpeed);
  size_t phase = 0;
  int left = phases.empty() ? 0 : phases[0].steps;

  for (int t = 1; t < total; ++t) {
    while (left <= 0 && phase + 1 < phases.size()) {
      ++phase;
      left = phases[phase].steps;
    }
    double accel = 0.0;
    double kappa = 0.0;
    if (!phases.empty()) {
      accel = (left > 0) ? phases[phase].accel : 0.0;
      kappa = std::clamp(phases[phase].curvature, -kMaxCurvature, kMaxCurvature);
    }
    v = std::clamp(v + accel * dt, 0.0, kMaxSpeed);
    h += v * kappa * dt;
    pos += v * dt * Vec2(std::cos(h), std::sin(h));
    out.push_back(pos);
    --left;
  }
  return out;
}

Scene generate(const ScenarioSpec & spec)
{
  spec.validate();
  Rng rng(spec.seed);
  const int total = spec.t_obs + spec.horizon;

  const std::vector<AgentPlan> plans = make_plans(spec, rng);
  std::vector<std::vector<Vec2>> paths;
  paths.reserve(plans.size());
  for (const AgentPlan & plan : plans) {
    paths.push_back(
      integrate_arcs(plan.start, plan.heading, plan.speed, plan.phases, spec.dt, total));
  }

  // Random rigid placement in the world frame, drawn after the plans so the
  // local geometry is placement-independent.
  const double angle = rng.uniform(-M_PI, M_PI);
  const Mat2 rot = rotation_matrix(angle);
  const Vec2 offset(rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0));
  const auto place = [&](const Vec2 & p) { return Vec2(rot * p + offset); };

  Scene scene;
  scene.dt = spec.dt;
  for (size_t i = 0; i < plans.size(); ++i) {
    AgentTrack track;
    track.id = "agent_" + std::to_string(i);
    track.positions.reserve(spec.t_obs);
    track.mask.assign(spec.t_obs, true);
    for (int t = 0; t < spec.t_obs; ++t) {
      Vec2 p = place(paths[i][t]);
      p += spec.noise_std * Vec2(rng.normal(), rng.normal());
      track.positions.push_back(snapped(p));
    }
    track.attributes = Eigen::Vector4d(
      1.0, i == 0 ? 1.0 : 0.0, plans[i].speed / kMaxSpeed, kind_code(spec.kind));

    std::vector<Vec2> future;
    future.reserve(spec.horizon);
    for (int t = spec.t_obs; t < total; ++t) {
      future.push_back(snapped(place(paths[i][t])));
    }
    scene.ground_truth[track.id] = std::move(future);
    scene.agents.push_back(std::move(track));
  }

  // Lane centerlines follow the noiseless paths of the first few agents.
  const size_t lane_sources = std::min<size_t>(3, paths.size());
  constexpr int kLaneStride = 10;
  for (size_t i = 0; i < lane_sources; ++i) {
    for (int t0 = 0; t0 + kLaneStride < total; t0 += kLaneStride) {
      const Vec2 a = paths[i][t0];
      const Vec2 b = paths[i][t0 + kLaneStride];
      if ((b - a).norm() < 1.0) {
        continue;
      }
      LaneSegment lane;
      lane.start = snapped(place(a));
      lane.end = snapped(place(b));
      lane.attributes =
        Eigen::Vector4d(1.0, kind_code(spec.kind), 0.5, (b - a).norm() / 10.0);
      scene.lanes.push_back(lane);
    }
  }

  scene.validate();
  return scene;
}

}  // namespace hypercast
