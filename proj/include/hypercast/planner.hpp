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

#ifndef HYPERCAST_PLANNER_HPP_
#define HYPERCAST_PLANNER_HPP_

#include <Eigen/Dense>
#include <vector>

#include "hypercast/geometry.hpp"

namespace hypercast
{

struct EgoState
{
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // rad
  double speed = 0.0;    // m/s, >= 0
};

struct Control
{
  double accel = 0.0;  // m/s^2
  double steer = 0.0;  // rad
};

using ControlSequence = std::vector<Control>;

constexpr double kWheelbase = 2.8;    // m
constexpr double kMaxAccel = 5.0;     // m/s^2
constexpr double kMaxSteer = 0.6;     // rad
constexpr double kSafeDistance = 3.0;  // m

struct PlannerWeights
{
  double comfort = 1.0;
  double lane = 2.0;
  double safety = 10.0;
};

struct PlannerProblem
{
  EgoState ego0;
  ControlSequence u0;
  // One N x 2 position matrix per neighbor, time-aligned with the plan.
  std::vector<Eigen::MatrixXd> neighbors;
  std::vector<Vec2> lane_ref;  // centerline polyline, >= 2 points
  PlannerWeights weights;
  double dt = 0.1;
};

/// Discrete kinematic bicycle integration: speed, then heading, then
/// position, each step using the just-updated values. Controls are clamped
/// to bounds first. Returns N positions (the state after each step).
Eigen::MatrixXd rollout(const ControlSequence & u, const EgoState & ego0, double dt);

/// Exact inverse of `rollout` whenever the implied controls stay inside
/// bounds: speeds from arc length, accelerations from speed differences,
/// steering from heading rate (speed floored at 0.1 m/s). Throws
/// DegenerateTrajectory on an empty trajectory.
ControlSequence trajectory_to_controls(
  const Eigen::MatrixXd & traj, const EgoState & ego0, double dt);

/// Weighted residual vector: comfort (accel, accel rate, steer, steer
/// rate), lane adherence (lateral offset and heading deviation from the
/// centerline), safety (hinge on the safe distance to every neighbor).
Eigen::VectorXd residuals(const ControlSequence & u, const PlannerProblem & problem);

/// 0.5 * ||residuals||^2.
double cost(const ControlSequence & u, const PlannerProblem & problem);

struct PlanIterate
{
  double cost = 0.0;
  double damping = 0.0;
};

struct PlanResult
{
  ControlSequence controls;
  Eigen::MatrixXd trajectory;        // rollout of `controls`
  std::vector<PlanIterate> iterates;  // accepted iterates, cost non-increasing
};

/// Damped Gauss-Newton over the stacked controls with a central-difference
/// Jacobian. Steps are accepted only on cost decrease (damping x10 on
/// rejection, halved on acceptance); stops on relative decrease < 1e-6 or
/// 100 iterations. Throws NonFiniteCost if the cost turns non-finite.
PlanResult optimize(const PlannerProblem & problem);

}  // namespace hypercast

#endif  // HYPERCAST_PLANNER_HPP_
