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

#include "hypercast/model.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "hypercast/errors.hpp"

namespace hypercast
{

Model::Model(const ModelConfig & cfg) : cfg_(cfg)
{
  cfg_.validate();
  build();
}

Model::Model(const ModelConfig & cfg, ParamStore loaded) : cfg_(cfg), params_(std::move(loaded))
{
  cfg_.validate();
  build();
}

void Model::build()
{
  Rng rng(cfg_.seed);
  ctn_ = make_ctn(params_, rng, cfg_);
  if (cfg_.stage >= 2) {
    tpn_ = make_tpn(params_, rng, cfg_);
  }
  if (cfg_.stage >= 3) {
    prn_ = make_prn(params_, rng, cfg_);
  }
}

ForwardOut Model::forward(ad::Graph & g, const Scene & scene) const
{
  scene.validate();
  const int m = static_cast<int>(scene.agents.size());

  ForwardOut out;
  out.geoms.reserve(m);
  for (int i = 0; i < m; ++i) {
    out.geoms.push_back(geom_features(scene, i, cfg_.neighbor_radius));
  }

  out.psi_local = embed_local(g, params_, ctn_, out.geoms, cfg_);
  out.s_pair = pair_embeddings(g, params_, ctn_, out.geoms);
  out.psi_global = global_interact(g, params_, ctn_.gi, out.psi_local, out.s_pair);

  const ad::Ref scene_feat = g.concat_cols({out.psi_local, out.psi_global});
  out.aux = apply_decoder(g, params_, ctn_.aux_dec, scene_feat, cfg_);
  if (cfg_.stage < 2) {
    return out;
  }

  out.tau = nn::apply(g, params_, tpn_.fuse, scene_feat);
  out.affinity = affinity(g.value(out.tau));
  // Group size cannot exceed the scene's agent count.
  const int s_eff = std::min(cfg_.hyperedge_size, m);
  out.hypergraph = search_hyperedges(out.affinity, s_eff);

  const MessagePassOut mp = message_pass(
    g, params_, tpn_, out.hypergraph.incidence(), out.tau, cfg_.mp_iterations);
  out.psi_hyper = gated_fuse(g, params_, tpn_, mp.nodes, out.tau);

  const ad::Ref main_in = g.add(scene_feat, nn::apply(g, params_, tpn_.inject, out.psi_hyper));
  out.base = apply_decoder(g, params_, tpn_.main_dec, main_in, cfg_);
  if (cfg_.stage < 3) {
    return out;
  }

  out.eta = encode_full_trajectory(g, params_, prn_, out.geoms, out.base.mu_disp, cfg_);
  out.psi_consist = consistency_features(g, params_, prn_, out.eta);
  out.psi_post =
    post_interaction_features(g, params_, ctn_.gi, out.eta, out.s_pair, m, cfg_.num_modes);
  out.refined = refine(
    g, params_, prn_, out.psi_local, out.psi_global, out.psi_hyper, out.psi_consist, out.psi_post,
    out.base, cfg_);
  return out;
}

std::vector<AgentPrediction> Model::predict(const Scene & scene) const
{
  ad::Graph g;
  const ForwardOut fwd = forward(g, scene);

  Eigen::MatrixXd pos;  // (M*K*N) x 2, per-agent frames
  Eigen::MatrixXd pi;   // M x K
  if (cfg_.stage >= 3) {
    pos = g.value(fwd.refined.refined_pos);
    pi = g.value(fwd.refined.refined_pi);
  } else if (cfg_.stage == 2) {
    pos = g.value(fwd.base.mu_pos);
    pi = g.value(fwd.base.pi);
  } else {
    pos = g.value(fwd.aux.mu_pos);
    pi = g.value(fwd.aux.pi);
  }

  const int m = static_cast<int>(scene.agents.size());
  const int k = cfg_.num_modes;
  const int n = cfg_.horizon;

  std::vector<AgentPrediction> preds;
  preds.reserve(m);
  for (int i = 0; i < m; ++i) {
    const ReferenceFrame & frame = fwd.geoms[i].frame;
    AgentPrediction ap;
    ap.agent_id = scene.agents[i].id;
    ap.modes.reserve(k);
    for (int mode = 0; mode < k; ++mode) {
      ModePrediction mp;
      mp.positions.resize(n, 2);
      for (int t = 0; t < n; ++t) {
        const Eigen::Index row = (static_cast<Eigen::Index>(i) * k + mode) * n + t;
        const Vec2 world = frame.origin + frame.rotation * Vec2(pos(row, 0), pos(row, 1));
        mp.positions(t, 0) = world.x();
        mp.positions(t, 1) = world.y();
      }
      mp.confidence = pi(i, mode);
      ap.modes.push_back(std::move(mp));
    }
    preds.push_back(std::move(ap));
  }
  return preds;
}

void Model::copy_aux_to_main()
{
  if (cfg_.stage < 2) {
    throw MissingComponent("proposal decoder requires stage >= 2");
  }
  const std::string from = "aux_dec.";
  for (const auto & [name, value] : params_.values()) {
    if (name.rfind(from, 0) != 0) {
      continue;
    }
    params_.mutable_at("main_dec." + name.substr(from.size())) = value;
  }
}

}  // namespace hypercast
