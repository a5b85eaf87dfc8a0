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

#ifndef HYPERCAST_SCENE_HPP_
#define HYPERCAST_SCENE_HPP_

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypercast/geometry.hpp"

namespace hypercast
{

/// One observed track. `positions` has exactly T_obs rows after padding;
/// `mask[t]` marks whether step t was actually observed. Padded steps carry
/// a copy of the nearest observed position so geometry stays finite.
struct AgentTrack
{
  std::string id;
  std::vector<Vec2> positions;      // length T_obs
  std::vector<bool> mask;           // length T_obs
  Eigen::VectorXd attributes;       // semantic attributes a_i

  int num_valid() const;
  int t_obs() const { return static_cast<int>(positions.size()); }
};

struct LaneSegment
{
  Vec2 start;
  Vec2 end;
  Eigen::VectorXd attributes;       // semantic attributes a_l

  double length() const { return (end - start).norm(); }
};

/// A prediction scene: agents' observed tracks plus lane segments in one
/// shared 2D frame. The first agent is the prediction focus (the "central"
/// agent of the scenario); ground truth futures are keyed by agent id.
struct Scene
{
  double dt = 0.1;
  std::vector<AgentTrack> agents;
  std::vector<LaneSegment> lanes;
  std::map<std::string, std::vector<Vec2>> ground_truth;  // length N each

  int t_obs() const { return agents.empty() ? 0 : agents.front().t_obs(); }
  int agent_index(const std::string & id) const;  // -1 when unknown
  const std::vector<Vec2> * gt_for(const std::string & id) const;

  /// Basic structural checks (shared timebase, dt > 0, finite positions,
  /// mask coverage). Throws on violation.
  void validate() const;
};

/// Per-agent local frame. `theta` points along the latest observed
/// displacement; `rotation` is the counterclockwise matrix for theta, so
/// world vectors map into the frame via rotation.transpose() * v.
struct ReferenceFrame
{
  Vec2 origin = Vec2::Zero();  // agent position at T_obs
  double theta = 0.0;
  Mat2 rotation = Mat2::Identity();

  Vec2 to_local(const Vec2 & world_vec) const { return rotation.transpose() * world_vec; }
};

/// Rotation/translation-invariant inputs for one central agent. All vectors
/// are expressed in the central agent's frame.
struct GeomFeatures
{
  int central = -1;
  ReferenceFrame frame;

  // Per displacement step (T_obs - 1 rows): [R^T * (p_t - p_{t-1}), a_i].
  Eigen::MatrixXd center_inputs;
  std::vector<bool> center_step_mask;

  // Neighbor agent indices within the radius at t = T_obs (central excluded).
  std::vector<int> neighbor_indices;
  // Per step: (num_neighbors x (4 + attr)) rows of
  // [R^T * (p_j^t - p_j^{t-1}), R^T * (p_j^t - p_i^t), a_j].
  std::vector<Eigen::MatrixXd> neighbor_inputs;
  std::vector<std::vector<bool>> neighbor_step_mask;

  // Candidate lanes: start point within the radius. Rows of
  // [R^T * (p_l^e - p_l^s), R^T * (p_l^s - p_i^{T_obs}), a_l].
  std::vector<int> lane_indices;
  Eigen::MatrixXd lane_inputs;

  // Pairwise frame relation, one row per agent j (including j == central):
  // [R_i^T * (p_j^{T_obs} - p_i^{T_obs}), cos(dtheta_ij), sin(dtheta_ij)].
  Eigen::MatrixXd pair_inputs;
};

/// Heading of the latest observed displacement. Falls back to the most
/// recent nonzero displacement, then to theta = 0 for stationary agents.
/// Throws TrackTooShort when fewer than two steps are valid.
ReferenceFrame build_reference_frame(const AgentTrack & track);

/// Consecutive-step displacements, length T_obs - 1. A displacement is
/// zero-filled when either endpoint is masked out.
std::vector<Vec2> displacements(const AgentTrack & track);

/// Per-step validity of `displacements`: both endpoints observed.
std::vector<bool> displacement_mask(const AgentTrack & track);

GeomFeatures geom_features(const Scene & scene, const std::string & central_id,
                           double neighbor_radius);

/// Convenience overload by agent index.
GeomFeatures geom_features(const Scene & scene, int central_index, double neighbor_radius);

/// Reference frames for every agent in the scene, in agent order.
std::vector<ReferenceFrame> all_reference_frames(const Scene & scene);

// Rigid-transform helpers (used by tests, the generator and plotting).
Scene shift_scene(const Scene & scene, const Vec2 & offset);
Scene rotate_scene(const Scene & scene, double angle, const Vec2 & pivot);

}  // namespace hypercast

#endif  // HYPERCAST_SCENE_HPP_
