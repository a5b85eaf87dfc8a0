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

#include "hypercast/refinement.hpp"

#include "hypercast/errors.hpp"

namespace hypercast
{

PrnBlocks make_prn(ParamStore & store, Rng & rng, const ModelConfig & cfg)
{
  const int d = cfg.hidden_dim;
  PrnBlocks prn;
  prn.gru_fwd = nn::make_gru(store, rng, "prn.gru_fwd", 2, d / 2);
  prn.gru_bwd = nn::make_gru(store, rng, "prn.gru_bwd", 2, d / 2);
  prn.consist = nn::make_mlp3(store, rng, "prn.consist", d, d, d);
  prn.refine_mu = nn::make_mlp3(store, rng, "prn.refine_mu", 5 * d, d, cfg.horizon * 2, true);
  prn.refine_pi = nn::make_mlp3(store, rng, "prn.refine_pi", 5 * d, d, 1, true);
  return prn;
}

ad::Ref encode_full_trajectory(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn,
  const std::vector<GeomFeatures> & geoms, ad::Ref mu_disp, const ModelConfig & cfg)
{
  const int m = static_cast<int>(geoms.size());
  const int k = cfg.num_modes;
  const int n = cfg.horizon;
  const int rows = m * k;
  if (g.value(mu_disp).rows() != static_cast<long>(rows) * n) {
    throw ShapeMismatch("proposal displacement count must be M*K*N");
  }

  // Token sequence per (agent, mode): zero anchor, T_obs - 1 observed
  // displacements (identical across the agent's modes), then N proposal
  // displacements. All in the agent's central frame.
  std::vector<ad::Ref> tokens;
  tokens.reserve(cfg.t_obs + n);
  tokens.push_back(g.zeros(rows, 2));
  for (int t = 0; t < cfg.t_obs - 1; ++t) {
    Eigen::MatrixXd step(rows, 2);
    for (int i = 0; i < m; ++i) {
      const Eigen::RowVector2d d = geoms[i].center_inputs.row(t).head(2);
      for (int mode = 0; mode < k; ++mode) {
        step.row(i * k + mode) = d;
      }
    }
    tokens.push_back(g.constant(std::move(step)));
  }
  for (int t = 0; t < n; ++t) {
    std::vector<int> idx(rows);
    for (int r = 0; r < rows; ++r) {
      idx[r] = r * n + t;
    }
    tokens.push_back(g.select_rows(mu_disp, std::move(idx)));
  }

  const int hidden = cfg.hidden_dim / 2;
  ad::Ref h_fwd = g.zeros(rows, hidden);
  for (const ad::Ref & x : tokens) {
    h_fwd = nn::gru_step(g, store, prn.gru_fwd, x, h_fwd);
  }
  ad::Ref h_bwd = g.zeros(rows, hidden);
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    h_bwd = nn::gru_step(g, store, prn.gru_bwd, *it, h_bwd);
  }
  return g.concat_cols({h_fwd, h_bwd});
}

ad::Ref consistency_features(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn, ad::Ref eta)
{
  return nn::apply(g, store, prn.consist, eta);
}

ad::Ref post_interaction_features(
  ad::Graph & g, const ParamStore & store, const GiBlocks & gi, ad::Ref eta, ad::Ref s, int m,
  int k)
{
  if (g.value(eta).rows() != static_cast<long>(m) * k) {
    throw ShapeMismatch("eta row count must be M*K");
  }
  // Interact agents within each mode, then restore (agent-major) row order.
  std::vector<ad::Ref> per_mode;
  per_mode.reserve(k);
  for (int mode = 0; mode < k; ++mode) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) {
      idx[i] = i * k + mode;
    }
    per_mode.push_back(global_interact(g, store, gi, g.select_rows(eta, std::move(idx)), s));
  }
  ad::Ref stacked = g.concat_rows(per_mode);  // row mode*M + i
  std::vector<int> perm(m * k);
  for (int i = 0; i < m; ++i) {
    for (int mode = 0; mode < k; ++mode) {
      perm[i * k + mode] = mode * m + i;
    }
  }
  return g.select_rows(stacked, std::move(perm));
}

RefineOut refine(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn, ad::Ref psi_local,
  ad::Ref psi_global, ad::Ref psi_hyper, ad::Ref psi_consist, ad::Ref psi_post,
  const DecoderOut & base, const ModelConfig & cfg)
{
  const int m = static_cast<int>(g.value(psi_local).rows());
  const int k = cfg.num_modes;
  const int rows = m * k;

  // Broadcast per-agent embeddings across modes.
  std::vector<int> agent_of_row(rows);
  for (int i = 0; i < m; ++i) {
    for (int mode = 0; mode < k; ++mode) {
      agent_of_row[i * k + mode] = i;
    }
  }
  ad::Ref cat = g.concat_cols(
    {g.select_rows(psi_local, agent_of_row), g.select_rows(psi_global, agent_of_row),
     g.select_rows(psi_hyper, agent_of_row), psi_consist, psi_post});

  RefineOut out;
  out.delta_mu = g.reshape(nn::apply(g, store, prn.refine_mu, cat), rows * cfg.horizon, 2);
  out.refined_pos = g.add(base.mu_pos, out.delta_mu);
  out.delta_pi = g.reshape(nn::apply(g, store, prn.refine_pi, cat), m, k);
  ad::Ref clamped = g.clamp_min(g.add(base.pi, out.delta_pi), 1e-6);
  out.refined_pi = g.div_rowwise(clamped, g.row_sum(clamped));
  return out;
}

}  // namespace hypercast
