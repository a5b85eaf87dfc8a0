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

#include "hypercast/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hypercast/errors.hpp"

namespace hypercast
{

namespace
{

constexpr double kSpeedFloor = 0.1;  // m/s, for the steering inverse

struct EgoRollout
{
  Eigen::MatrixXd positions;        // N x 2
  std::vector<double> headings;     // N
  std::vector<double> speeds;       // N
  std::vector<double> accels;       // N, clamped
  std::vector<double> steers;       // N, clamped
};

EgoRollout roll(const ControlSequence & u, const EgoState & ego0, double dt)
{
  const int n = static_cast<int>(u.size());
  EgoRollout out;
  out.positions.resize(n, 2);
  out.headings.resize(n);
  out.speeds.resize(n);
  out.accels.resize(n);
  out.steers.resize(n);

  Vec2 pos = ego0.position;
  double heading = ego0.heading;
  double v = std::max(0.0, ego0.speed);
  for (int t = 0; t < n; ++t) {
    const double a = std::clamp(u[t].accel, -kMaxAccel, kMaxAccel);
    const double steer = std::clamp(u[t].steer, -kMaxSteer, kMaxSteer);
    v = std::max(0.0, v + a * dt);
    heading += v / kWheelbase * std::tan(steer) * dt;
    pos += v * dt * Vec2(std::cos(heading), std::sin(heading));
    out.positions(t, 0) = pos.x();
    out.positions(t, 1) = pos.y();
    out.headings[t] = heading;
    out.speeds[t] = v;
    out.accels[t] = a;
    out.steers[t] = steer;
  }
  return out;
}

/// Distance to the polyline plus the heading of its closest segment.
void lane_deviation(
  const std::vector<Vec2> & lane, const Vec2 & p, double heading, double & lateral,
  double & heading_dev)
{
  lateral = 0.0;
  heading_dev = 0.0;
  if (lane.size() < 2) {
    return;
  }
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < lane.size(); ++i) {
    const Vec2 a = lane[i];
    const Vec2 b = lane[i + 1];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 closest = a + s * ab;
    const double d = (p - closest).norm();
    if (d < best) {
      best = d;
      lateral = d;
      heading_dev = wrap_angle(heading - std::atan2(ab.y(), ab.x()));
    }
  }
}

}  // namespace

Eigen::MatrixXd rollout(const ControlSequence & u, const EgoState & ego0, double dt)
{
  return roll(u, ego0, dt).positions;
}

ControlSequence trajectory_to_controls(
  const Eigen::MatrixXd & traj, const EgoState & ego0, double dt)
{
  const int n = static_cast<int>(traj.rows());
  if (n == 0) {
    throw DegenerateTrajectory("trajectory_to_controls: empty trajectory");
  }
  if (traj.cols() != 2) {
    throw ShapeMismatch("trajectory_to_controls: expected N x 2 positions");
  }

  ControlSequence u(n);
  Vec2 prev_pos = ego0.position;
  double prev_heading = ego0.heading;
  double prev_speed = std::max(0.0, ego0.speed);
  for (int t = 0; t < n; ++t) {
    const Vec2 pos(traj(t, 0), traj(t, 1));
    const Vec2 d = pos - prev_pos;
    const double speed = d.norm() / dt;
    const double heading = speed * dt > 1e-9 ? std::atan2(d.y(), d.x()) : prev_heading;

    u[t].accel = std::clamp((speed - prev_speed) / dt, -kMaxAccel, kMaxAccel);
    const double turn_rate = wrap_angle(heading - prev_heading) / dt;
    u[t].steer = std::clamp(
      std::atan(kWheelbase * turn_rate / std::max(speed, kSpeedFloor)), -kMaxSteer, kMaxSteer);

    prev_pos = pos;
    prev_heading = heading;
    prev_speed = speed;
  }
  return u;
}

Eigen::VectorXd residuals(const ControlSequence & u, const PlannerProblem & problem)
{
  const int n = static_cast<int>(u.size());
  const EgoRollout ego = roll(u, problem.ego0, problem.dt);

  // comfort: accel, accel rate (t >= 1), steer, steer rate (t >= 1)
  // lane:    lateral offset, heading deviation
  // safety:  hinge per (step, neighbor)
  const int n_comfort = n + (n - 1) + n + (n - 1);
  const int n_lane = 2 * n;
  const int n_safety = n * static_cast<int>(problem.neighbors.size());
  Eigen::VectorXd r(n_comfort + n_lane + n_safety);

  int at = 0;
  const double wc = problem.weights.comfort;
  for (int t = 0; t < n; ++t) {
    r(at++) = wc * ego.accels[t];
  }
  for (int t = 1; t < n; ++t) {
    r(at++) = wc * (ego.accels[t] - ego.accels[t - 1]);
  }
  for (int t = 0; t < n; ++t) {
    r(at++) = wc * ego.steers[t];
  }
  for (int t = 1; t < n; ++t) {
    r(at++) = wc * (ego.steers[t] - ego.steers[t - 1]);
  }

  const double wl = problem.weights.lane;
  for (int t = 0; t < n; ++t) {
    double lateral = 0.0;
    double heading_dev = 0.0;
    lane_deviation(
      problem.lane_ref, Vec2(ego.positions(t, 0), ego.positions(t, 1)), ego.headings[t],
      lateral, heading_dev);
    r(at++) = wl * lateral;
    r(at++) = wl * heading_dev;
  }

  const double ws = problem.weights.safety;
  for (const Eigen::MatrixXd & nbr : problem.neighbors) {
    for (int t = 0; t < n; ++t) {
      const double dist = (ego.positions.row(t) - nbr.row(t)).norm();
      r(at++) = ws * std::max(0.0, kSafeDistance - dist);
    }
  }
  return r;
}

double cost(const ControlSequence & u, const PlannerProblem & problem)
{
  return 0.5 * residuals(u, problem).squaredNorm();
}

PlanResult optimize(const PlannerProblem & problem)
{
  const int n = static_cast<int>(problem.u0.size());
  if (n == 0) {
    throw DegenerateTrajectory("optimize: empty initial plan");
  }
  for (const Eigen::MatrixXd & nbr : problem.neighbors) {
    if (nbr.rows() != n || nbr.cols() != 2) {
      throw ShapeMismatch("optimize: neighbor horizon disagrees with the plan");
    }
  }

  const auto pack = [n](const ControlSequence & u) {
    Eigen::VectorXd x(2 * n);
    for (int t = 0; t < n; ++t) {
      x(2 * t) = u[t].accel;
      x(2 * t + 1) = u[t].steer;
    }
    return x;
  };
  const auto unpack = [n](const Eigen::VectorXd & x) {
    ControlSequence u(n);
    for (int t = 0; t < n; ++t) {
      u[t].accel = std::clamp(x(2 * t), -kMaxAccel, kMaxAccel);
      u[t].steer = std::clamp(x(2 * t + 1), -kMaxSteer, kMaxSteer);
    }
    return u;
  };
  const auto eval = [&](const Eigen::VectorXd & x) { return residuals(unpack(x), problem); };

  Eigen::VectorXd x = pack(unpack(pack(problem.u0)));  // start from clamped controls
  Eigen::VectorXd r = eval(x);
  double current = 0.5 * r.squaredNorm();
  if (!std::isfinite(current)) {
    throw NonFiniteCost("optimize: initial cost is not finite");
  }

  PlanResult result;
  result.iterates.push_back({current, 0.0});

  double damping = 1e-3;
  constexpr double kFdStep = 1e-6;
  constexpr double kRelTol = 1e-6;
  constexpr int kMaxIterations = 100;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::MatrixXd jac(r.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(j) += kFdStep;
      xm(j) -= kFdStep;
      jac.col(j) = (eval(xp) - eval(xm)) / (2.0 * kFdStep);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    bool accepted = false;
    while (damping < 1e12) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += damping;
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      const Eigen::VectorXd x_new = x - step;
      const Eigen::VectorXd r_new = eval(x_new);
      const double cost_new = 0.5 * r_new.squaredNorm();
      if (!std::isfinite(cost_new)) {
        throw NonFiniteCost("optimize: cost turned non-finite");
      }
      if (cost_new < current) {
        const double rel = (current - cost_new) / std::max(current, 1e-300);
        x = x_new;
        r = r_new;
        current = cost_new;
        damping = std::max(damping * 0.5, 1e-12);
        result.iterates.push_back({current, damping});
        accepted = true;
        if (rel < kRelTol) {
          iter = kMaxIterations;  // converged
        }
        break;
      }
      damping *= 10.0;
    }
    if (!accepted) {
      break;  // no descent direction at any damping: local minimum
    }
  }

  result.controls = unpack(x);
  result.trajectory = rollout(result.controls, problem.ego0, problem.dt);
  return result;
}

}  // namespace hypercast
