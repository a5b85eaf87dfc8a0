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

#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "hypercast/errors.hpp"
#include "hypercast/planner.hpp"

namespace
{

double min_neighbor_distance(
  const Eigen::MatrixXd & traj, const std::vector<Eigen::MatrixXd> & neighbors)
{
  double best = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd & nbr : neighbors) {
    for (int t = 0; t < traj.rows(); ++t) {
      best = std::min(best, (traj.row(t) - nbr.row(t)).norm());
    }
  }
  return best;
}

double max_polyline_deviation(
  const Eigen::MatrixXd & traj, const std::vector<hypercast::Vec2> & line)
{
  double worst = 0.0;
  for (int t = 0; t < traj.rows(); ++t) {
    const hypercast::Vec2 pos(traj(t, 0), traj(t, 1));
    double best = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s + 1 < line.size(); ++s) {
      const hypercast::Vec2 a = line[s];
      const hypercast::Vec2 d = line[s + 1] - a;
      const double u = std::clamp((pos - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
      best = std::min(best, (pos - (a + u * d)).norm());
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Oncoming car in the ego's current lane; the reference lane bends away.
hypercast::PlannerProblem head_on_problem()
{
  hypercast::PlannerProblem p;
  p.ego0.position = hypercast::Vec2(0.0, 0.0);
  p.ego0.heading = 0.0;
  p.ego0.speed = 8.0;
  const int n = 30;
  p.u0.assign(n, hypercast::Control{});
  Eigen::MatrixXd oncoming(n, 2);
  for (int t = 0; t < n; ++t) {
    oncoming(t, 0) = 30.0 - 8.0 * p.dt * (t + 1);
    oncoming(t, 1) = 0.0;
  }
  p.neighbors.push_back(oncoming);
  for (double x = 0.0; x <= 40.0; x += 2.0) {
    p.lane_ref.push_back(hypercast::Vec2(x, -2.0 * (1.0 + std::tanh((x - 8.0) / 3.0))));
  }
  return p;
}

}  // namespace

TEST_CASE("zero controls roll a straight constant-speed line")
{
  hypercast::EgoState ego;
  ego.position = hypercast::Vec2(2.0, 1.0);
  ego.heading = M_PI / 2.0;
  ego.speed = 5.0;
  const hypercast::ControlSequence u(30);
  const Eigen::MatrixXd traj = hypercast::rollout(u, ego, 0.1);
  REQUIRE(traj.rows() == 30);
  REQUIRE(traj.cols() == 2);
  for (int t = 0; t < 30; ++t) {
    CHECK(traj(t, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(traj(t, 1) == doctest::Approx(1.0 + 0.5 * (t + 1)).epsilon(1e-12));
  }
}

TEST_CASE("constant steering traces the bicycle turning radius")
{
  hypercast::EgoState ego;
  ego.speed = 5.0;
  hypercast::ControlSequence u(120);
  for (auto & c : u) {
    c.steer = 0.3;
  }
  const Eigen::MatrixXd traj = hypercast::rollout(u, ego, 0.1);
  const double want = hypercast::kWheelbase / std::tan(0.3);

  // circumradius of consecutive point triples
  for (int t = 10; t + 2 < traj.rows(); t += 17) {
    const Eigen::Vector2d a = traj.row(t);
    const Eigen::Vector2d b = traj.row(t + 1);
    const Eigen::Vector2d c = traj.row(t + 2);
    const double la = (b - c).norm();
    const double lb = (a - c).norm();
    const double lc = (a - b).norm();
    const double cross = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const double radius = la * lb * lc / (2.0 * std::abs(cross));
    CHECK(radius == doctest::Approx(want).epsilon(0.02));
  }
}

TEST_CASE("controls are clamped to the actuator bounds")
{
  hypercast::EgoState ego;
  ego.speed = 3.0;
  hypercast::ControlSequence wild(20);
  hypercast::ControlSequence clamped(20);
  for (int t = 0; t < 20; ++t) {
    wild[t] = {50.0, -7.0};
    clamped[t] = {hypercast::kMaxAccel, -hypercast::kMaxSteer};
  }
  const Eigen::MatrixXd a = hypercast::rollout(wild, ego, 0.1);
  const Eigen::MatrixXd b = hypercast::rollout(clamped, ego, 0.1);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rollout and its inverse round-trip")
{
  hypercast::EgoState ego;
  ego.position = hypercast::Vec2(-3.0, 4.0);
  ego.heading = 0.7;
  ego.speed = 6.0;
  hypercast::ControlSequence u(30);
  for (int t = 0; t < 30; ++t) {
    u[t].accel = 0.8 * std::sin(0.3 * t);
    u[t].steer = 0.25 * std::cos(0.2 * t);
  }
  const Eigen::MatrixXd traj = hypercast::rollout(u, ego, 0.1);
  const hypercast::ControlSequence back = hypercast::trajectory_to_controls(traj, ego, 0.1);
  const Eigen::MatrixXd again = hypercast::rollout(back, ego, 0.1);
  REQUIRE(again.rows() == traj.rows());
  const double err = (again - traj).cwiseAbs().maxCoeff();
  CHECK(err <= 0.3);   // the contract
  CHECK(err < 1e-6);   // in-bounds controls invert essentially exactly

  // A straight constant-speed line implies near-zero controls.
  const hypercast::ControlSequence coast(30);
  const hypercast::ControlSequence straight =
    hypercast::trajectory_to_controls(hypercast::rollout(coast, ego, 0.1), ego, 0.1);
  for (const auto & c : straight) {
    CHECK(std::abs(c.accel) < 1e-9);
    CHECK(std::abs(c.steer) < 1e-9);
  }
}

TEST_CASE("degenerate inputs are rejected")
{
  hypercast::EgoState ego;
  CHECK_THROWS_AS(
    hypercast::trajectory_to_controls(Eigen::MatrixXd(0, 2), ego, 0.1),
    hypercast::DegenerateTrajectory);

  hypercast::PlannerProblem empty;
  CHECK_THROWS_AS(hypercast::optimize(empty), hypercast::DegenerateTrajectory);

  hypercast::PlannerProblem bad = head_on_problem();
  bad.neighbors[0] = Eigen::MatrixXd::Zero(7, 2);
  CHECK_THROWS_AS(hypercast::optimize(bad), hypercast::ShapeMismatch);
}

TEST_CASE("safety residuals vanish at and beyond the safe distance")
{
  hypercast::PlannerProblem p;
  p.ego0.speed = 0.0;
  p.u0.assign(10, hypercast::Control{});
  p.lane_ref = {hypercast::Vec2(-5.0, 0.0), hypercast::Vec2(5.0, 0.0)};

  const int n = static_cast<int>(p.u0.size());
  const double base = hypercast::cost(p.u0, p);
  CHECK(hypercast::residuals(p.u0, p).size() == (4 * n - 2) + 2 * n);

  // at exactly the safe distance the hinge is zero
  p.neighbors.push_back(Eigen::MatrixXd::Zero(n, 2));
  p.neighbors[0].col(0).setConstant(hypercast::kSafeDistance);
  CHECK(hypercast::residuals(p.u0, p).size() == (4 * n - 2) + 2 * n + n);
  CHECK(hypercast::cost(p.u0, p) == base);

  // one metre inside it, each step contributes (10 * 1)^2 / 2
  p.neighbors[0].col(0).setConstant(hypercast::kSafeDistance - 1.0);
  CHECK(hypercast::cost(p.u0, p) == doctest::Approx(base + 0.5 * 100.0 * n).epsilon(1e-12));
}

TEST_CASE("head-on avoidance: the optimizer trades the near-miss for the open lane")
{
  const hypercast::PlannerProblem p = head_on_problem();

  const Eigen::MatrixXd before = hypercast::rollout(p.u0, p.ego0, p.dt);
  const double dist_before = min_neighbor_distance(before, p.neighbors);
  CHECK(dist_before < 1.0);

  const hypercast::PlanResult r = hypercast::optimize(p);
  const double dist_after = min_neighbor_distance(r.trajectory, p.neighbors);
  CHECK(dist_after >= 3.0);
  CHECK(max_polyline_deviation(r.trajectory, p.lane_ref) <= 1.5);

  REQUIRE(!r.iterates.empty());
  CHECK(r.iterates.front().cost == hypercast::cost(p.u0, p));
  for (size_t i = 1; i < r.iterates.size(); ++i) {
    CHECK(r.iterates[i].cost <= r.iterates[i - 1].cost);
  }
  CHECK(r.iterates.back().cost < 0.01 * r.iterates.front().cost);

  // the returned trajectory is the rollout of the returned controls
  CHECK(
    (r.trajectory - hypercast::rollout(r.controls, p.ego0, p.dt)).cwiseAbs().maxCoeff() ==
    0.0);
  for (const auto & c : r.controls) {
    CHECK(std::abs(c.accel) <= hypercast::kMaxAccel);
    CHECK(std::abs(c.steer) <= hypercast::kMaxSteer);
  }
}
