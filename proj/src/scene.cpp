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

#include "hypercast/scene.hpp"

#include <algorithm>
#include <cmath>

#include "hypercast/errors.hpp"

namespace hypercast
{

namespace
{
constexpr double kZeroDisplacement = 1e-6;  // m, below this a heading is undefined
}

int AgentTrack::num_valid() const
{
  int n = 0;
  for (bool m : mask) {
    if (m) ++n;
  }
  return n;
}

int Scene::agent_index(const std::string & id) const
{
  for (size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<Vec2> * Scene::gt_for(const std::string & id) const
{
  auto it = ground_truth.find(id);
  return it == ground_truth.end() ? nullptr : &it->second;
}

void Scene::validate() const
{
  if (dt <= 0.0) throw InvalidSpec("scene dt must be positive");
  const int t = t_obs();
  for (const auto & a : agents) {
    if (a.t_obs() != t) throw ShapeMismatch("agent " + a.id + " does not share the timebase");
    if (a.mask.size() != a.positions.size()) {
      throw ShapeMismatch("agent " + a.id + " mask length mismatch");
    }
    if (a.num_valid() < 2) throw TrackTooShort("agent " + a.id + " has fewer than 2 valid steps");
    for (const auto & p : a.positions) {
      if (!p.allFinite()) throw InvalidSpec("agent " + a.id + " has non-finite positions");
    }
  }
  for (const auto & l : lanes) {
    if (l.length() < 1e-6) throw InvalidSpec("lane segment shorter than 1e-6 m");
  }
  for (const auto & [id, gt] : ground_truth) {
    if (gt.empty()) throw InvalidSpec("empty ground truth for agent " + id);
    if (agent_index(id) < 0) throw UnknownAgent("ground truth for unknown agent " + id);
  }
}

ReferenceFrame build_reference_frame(const AgentTrack & track)
{
  if (track.num_valid() < 2) {
    throw TrackTooShort("reference frame needs at least 2 valid steps");
  }
  const int t = track.t_obs();

  ReferenceFrame frame;
  frame.origin = track.positions[t - 1];

  double theta = 0.0;
  bool found = false;
  // Latest trajectory segment first, then walk backwards over earlier
  // displacements until a nonzero one appears.
  for (int i = t - 1; i >= 1; --i) {
    if (!track.mask[i] || !track.mask[i - 1]) continue;
    const Vec2 d = track.positions[i] - track.positions[i - 1];
    if (d.norm() >= kZeroDisplacement) {
      theta = std::atan2(d.y(), d.x());
      found = true;
      break;
    }
  }
  if (!found) theta = 0.0;

  frame.theta = theta;
  frame.rotation = rotation_matrix(theta);
  return frame;
}

std::vector<Vec2> displacements(const AgentTrack & track)
{
  const int t = track.t_obs();
  std::vector<Vec2> out;
  out.reserve(std::max(0, t - 1));
  for (int i = 1; i < t; ++i) {
    if (track.mask[i] && track.mask[i - 1]) {
      out.push_back(track.positions[i] - track.positions[i - 1]);
    } else {
      out.push_back(Vec2::Zero());
    }
  }
  return out;
}

std::vector<bool> displacement_mask(const AgentTrack & track)
{
  const int t = track.t_obs();
  std::vector<bool> out;
  out.reserve(std::max(0, t - 1));
  for (int i = 1; i < t; ++i) {
    out.push_back(track.mask[i] && track.mask[i - 1]);
  }
  return out;
}

GeomFeatures geom_features(const Scene & scene, const std::string & central_id,
                           double neighbor_radius)
{
  const int idx = scene.agent_index(central_id);
  if (idx < 0) throw UnknownAgent("no agent with id " + central_id);
  return geom_features(scene, idx, neighbor_radius);
}

GeomFeatures geom_features(const Scene & scene, int central_index, double neighbor_radius)
{
  if (central_index < 0 || central_index >= static_cast<int>(scene.agents.size())) {
    throw UnknownAgent("central agent index out of range");
  }
  if (neighbor_radius <= 0.0) throw InvalidSpec("neighbor_radius must be positive");

  const AgentTrack & center = scene.agents[central_index];
  const int t_obs = center.t_obs();
  const int steps = t_obs - 1;

  GeomFeatures g;
  g.central = central_index;
  g.frame = build_reference_frame(center);
  const Mat2 rt = g.frame.rotation.transpose();
  const Vec2 center_last = center.positions[t_obs - 1];

  const int a_dim = static_cast<int>(center.attributes.size());
  g.center_inputs.resize(steps, 2 + a_dim);
  g.center_step_mask = displacement_mask(center);
  const auto center_disp = displacements(center);
  for (int t = 0; t < steps; ++t) {
    g.center_inputs.row(t).head(2) = (rt * center_disp[t]).transpose();
    g.center_inputs.row(t).tail(a_dim) = center.attributes.transpose();
  }

  // Neighbor set fixed at t = T_obs: agents within the radius of the center.
  for (size_t j = 0; j < scene.agents.size(); ++j) {
    if (static_cast<int>(j) == central_index) continue;
    const Vec2 rel = scene.agents[j].positions[t_obs - 1] - center_last;
    if (rel.norm() <= neighbor_radius) g.neighbor_indices.push_back(static_cast<int>(j));
  }

  g.neighbor_inputs.resize(steps);
  g.neighbor_step_mask.resize(steps);
  for (int t = 0; t < steps; ++t) {
    const int n = static_cast<int>(g.neighbor_indices.size());
    Eigen::MatrixXd rows(n, 4 + a_dim);
    std::vector<bool> valid(n, false);
    for (int nj = 0; nj < n; ++nj) {
      const AgentTrack & nbr = scene.agents[g.neighbor_indices[nj]];
      if (static_cast<int>(nbr.attributes.size()) != a_dim) {
        throw ShapeMismatch("agent attribute dimensions differ within scene");
      }
      const bool ok = nbr.mask[t + 1] && nbr.mask[t];
      const Vec2 disp = ok ? Vec2(nbr.positions[t + 1] - nbr.positions[t]) : Vec2::Zero();
      const Vec2 rel = ok && center.mask[t + 1]
                         ? Vec2(nbr.positions[t + 1] - center.positions[t + 1])
                         : Vec2::Zero();
      rows.row(nj).head(2) = (rt * disp).transpose();
      rows.row(nj).segment(2, 2) = (rt * rel).transpose();
      rows.row(nj).tail(a_dim) = nbr.attributes.transpose();
      valid[nj] = ok;
    }
    g.neighbor_inputs[t] = std::move(rows);
    g.neighbor_step_mask[t] = std::move(valid);
  }

  // Lane candidates: segments whose start point lies within the radius.
  int l_dim = 0;
  for (size_t l = 0; l < scene.lanes.size(); ++l) {
    const Vec2 rel = scene.lanes[l].start - center_last;
    if (rel.norm() <= neighbor_radius) g.lane_indices.push_back(static_cast<int>(l));
    l_dim = std::max(l_dim, static_cast<int>(scene.lanes[l].attributes.size()));
  }
  g.lane_inputs.resize(static_cast<int>(g.lane_indices.size()), 4 + l_dim);
  for (size_t r = 0; r < g.lane_indices.size(); ++r) {
    const LaneSegment & lane = scene.lanes[g.lane_indices[r]];
    if (static_cast<int>(lane.attributes.size()) != l_dim) {
      throw ShapeMismatch("lane attribute dimensions differ within scene");
    }
    g.lane_inputs.row(r).head(2) = (rt * (lane.end - lane.start)).transpose();
    g.lane_inputs.row(r).segment(2, 2) = (rt * (lane.start - center_last)).transpose();
    g.lane_inputs.row(r).tail(l_dim) = lane.attributes.transpose();
  }

  // Pairwise frame relations for the global stage.
  const int m = static_cast<int>(scene.agents.size());
  g.pair_inputs.resize(m, 4);
  for (int j = 0; j < m; ++j) {
    if (j == central_index) {
      g.pair_inputs.row(j) << 0.0, 0.0, 1.0, 0.0;
      continue;
    }
    const ReferenceFrame fj = build_reference_frame(scene.agents[j]);
    const Vec2 rel = rt * (scene.agents[j].positions[t_obs - 1] - center_last);
    const double dtheta = fj.theta - g.frame.theta;
    g.pair_inputs.row(j) << rel.x(), rel.y(), std::cos(dtheta), std::sin(dtheta);
  }

  return g;
}

std::vector<ReferenceFrame> all_reference_frames(const Scene & scene)
{
  std::vector<ReferenceFrame> frames;
  frames.reserve(scene.agents.size());
  for (const auto & agent : scene.agents) frames.push_back(build_reference_frame(agent));
  return frames;
}

Scene shift_scene(const Scene & scene, const Vec2 & offset)
{
  Scene out = scene;
  for (auto & a : out.agents) {
    for (auto & p : a.positions) p += offset;
  }
  for (auto & l : out.lanes) {
    l.start += offset;
    l.end += offset;
  }
  for (auto & [id, gt] : out.ground_truth) {
    for (auto & p : gt) p += offset;
  }
  return out;
}

Scene rotate_scene(const Scene & scene, double angle, const Vec2 & pivot)
{
  const Mat2 r = rotation_matrix(angle);
  Scene out = scene;
  auto rot = [&](const Vec2 & p) { return Vec2(pivot + r * (p - pivot)); };
  for (auto & a : out.agents) {
    for (auto & p : a.positions) p = rot(p);
  }
  for (auto & l : out.lanes) {
    l.start = rot(l.start);
    l.end = rot(l.end);
  }
  for (auto & [id, gt] : out.ground_truth) {
    for (auto & p : gt) p = rot(p);
  }
  return out;
}

}  // namespace hypercast
