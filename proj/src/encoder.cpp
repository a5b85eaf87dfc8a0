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

#include "hypercast/encoder.hpp"

#include "hypercast/errors.hpp"

namespace hypercast
{

CtnBlocks make_ctn(ParamStore & store, Rng & rng, const ModelConfig & cfg)
{
  const int d = cfg.hidden_dim;
  CtnBlocks ctn;
  ctn.center = nn::make_mlp2(store, rng, "ctn.center", 2 + cfg.agent_attr_dim, d, d);
  ctn.nbr = nn::make_mlp2(store, rng, "ctn.nbr", 4 + cfg.agent_attr_dim, d, d);
  ctn.lane = nn::make_mlp2(store, rng, "ctn.lane", 4 + cfg.lane_attr_dim, d, d);
  ctn.rel = nn::make_mlp2(store, rng, "ctn.rel", 4, d, d);

  ctn.step_attn = nn::make_attention(store, rng, "ctn.step_attn", d, d, d);
  ctn.step_ln = nn::make_layer_norm(store, "ctn.step_ln", d);
  ctn.pos_enc = "ctn.pos_enc";
  if (!store.has(ctn.pos_enc)) {
    store.add(ctn.pos_enc, kaiming_uniform(rng, cfg.t_obs - 1, d, d));
  }
  ctn.temporal_q = "ctn.temporal_q";
  if (!store.has(ctn.temporal_q)) {
    store.add(ctn.temporal_q, kaiming_uniform(rng, 1, d, d));
  }
  ctn.temporal_attn = nn::make_attention(store, rng, "ctn.temporal_attn", d, d, d);
  ctn.temporal_ln = nn::make_layer_norm(store, "ctn.temporal_ln", d);
  ctn.lane_attn = nn::make_attention(store, rng, "ctn.lane_attn", d, d, d);
  ctn.local_ln = nn::make_layer_norm(store, "ctn.local_ln", d);

  ctn.gi.attn = nn::make_attention(store, rng, "gi.attn", d, 2 * d, d);
  ctn.gi.ln = nn::make_layer_norm(store, "gi.ln", d);

  ctn.aux_dec = make_decoder(store, rng, "aux_dec", cfg);
  return ctn;
}

DecoderBlocks make_decoder(
  ParamStore & store, Rng & rng, const std::string & prefix, const ModelConfig & cfg)
{
  const int d = cfg.hidden_dim;
  const int out = cfg.num_modes * cfg.horizon * 2;
  DecoderBlocks dec;
  dec.mu = nn::make_mlp2(store, rng, prefix + ".mu", 2 * d, d, out, false);
  dec.b = nn::make_mlp2(store, rng, prefix + ".b", 2 * d, d, out, false);
  dec.pi = nn::make_mlp2(store, rng, prefix + ".pi", 2 * d, d, cfg.num_modes, false);
  return dec;
}

ad::Ref embed_local(
  ad::Graph & g, const ParamStore & store, const CtnBlocks & ctn,
  const std::vector<GeomFeatures> & geoms, const ModelConfig & cfg)
{
  const int steps = cfg.t_obs - 1;
  std::vector<ad::Ref> agent_rows;
  agent_rows.reserve(geoms.size());

  for (const GeomFeatures & geom : geoms) {
    if (geom.center_inputs.rows() != steps) {
      throw ShapeMismatch("geom features do not match the configured t_obs");
    }
    // Per-step embeddings of the central agent's motion.
    ad::Ref c = nn::apply(g, store, ctn.center, g.constant(geom.center_inputs));

    // Agent-agent cross-attention within each time step.
    const int n = static_cast<int>(geom.neighbor_indices.size());
    ad::Ref fused = c;
    if (n > 0) {
      Eigen::MatrixXd stacked(steps * n, geom.neighbor_inputs[0].cols());
      for (int t = 0; t < steps; ++t) {
        stacked.middleRows(t * n, n) = geom.neighbor_inputs[t];
      }
      ad::Ref nbr_emb = nn::apply(g, store, ctn.nbr, g.constant(stacked));
      std::vector<ad::Ref> step_rows;
      step_rows.reserve(steps);
      for (int t = 0; t < steps; ++t) {
        ad::Ref q = g.slice_rows(c, t, 1);
        ad::Ref kv = g.slice_rows(nbr_emb, t * n, n);
        Eigen::MatrixXd mask(1, n);
        for (int nj = 0; nj < n; ++nj) {
          mask(0, nj) = geom.neighbor_step_mask[t][nj] ? 1.0 : 0.0;
        }
        step_rows.push_back(nn::apply(g, store, ctn.step_attn, q, kv, &mask));
      }
      fused = g.add(c, g.concat_rows(step_rows));
    }
    ad::Ref s = nn::apply(g, store, ctn.step_ln, fused);

    // Temporal aggregation: learned query over position-encoded step tokens,
    // masked to observed displacement steps.
    ad::Ref tokens = g.add(s, store.use(g, ctn.pos_enc));
    Eigen::MatrixXd tmask(1, steps);
    for (int t = 0; t < steps; ++t) {
      tmask(0, t) = geom.center_step_mask[t] ? 1.0 : 0.0;
    }
    ad::Ref pooled = nn::apply(
      g, store, ctn.temporal_attn, store.use(g, ctn.temporal_q), tokens, &tmask);
    ad::Ref psi_t = nn::apply(g, store, ctn.temporal_ln, pooled);

    // Lane cross-attention, residual on the temporal summary.
    ad::Ref local = psi_t;
    if (geom.lane_inputs.rows() > 0) {
      ad::Ref lane_emb = nn::apply(g, store, ctn.lane, g.constant(geom.lane_inputs));
      local = g.add(psi_t, nn::apply(g, store, ctn.lane_attn, psi_t, lane_emb));
    }
    agent_rows.push_back(nn::apply(g, store, ctn.local_ln, local));
  }
  return g.concat_rows(agent_rows);
}

ad::Ref pair_embeddings(
  ad::Graph & g, const ParamStore & store, const CtnBlocks & ctn,
  const std::vector<GeomFeatures> & geoms)
{
  const int m = static_cast<int>(geoms.size());
  Eigen::MatrixXd stacked(m * m, 4);
  for (int i = 0; i < m; ++i) {
    if (geoms[i].pair_inputs.rows() != m) {
      throw ShapeMismatch("pair inputs do not cover every agent");
    }
    stacked.middleRows(i * m, m) = geoms[i].pair_inputs;
  }
  return nn::apply(g, store, ctn.rel, g.constant(stacked));
}

ad::Ref global_interact(
  ad::Graph & g, const ParamStore & store, const GiBlocks & gi, ad::Ref features, ad::Ref s)
{
  const int m = static_cast<int>(g.value(features).rows());
  if (g.value(s).rows() != static_cast<long>(m) * m) {
    throw ShapeMismatch("pair embedding count must be M*M");
  }
  std::vector<ad::Ref> rows;
  rows.reserve(m);
  for (int i = 0; i < m; ++i) {
    ad::Ref q = g.slice_rows(features, i, 1);
    ad::Ref kv = g.concat_cols({features, g.slice_rows(s, i * m, m)});
    rows.push_back(nn::apply(g, store, gi.attn, q, kv));
  }
  return nn::apply(g, store, gi.ln, g.add(features, g.concat_rows(rows)));
}

DecoderOut apply_decoder(
  ad::Graph & g, const ParamStore & store, const DecoderBlocks & dec, ad::Ref input,
  const ModelConfig & cfg)
{
  const int m = static_cast<int>(g.value(input).rows());
  const int flat = m * cfg.num_modes * cfg.horizon;

  DecoderOut out;
  out.mu_disp = g.reshape(nn::apply(g, store, dec.mu, input), flat, 2);
  out.mu_pos = g.cumsum_rows(out.mu_disp, cfg.horizon);
  ad::Ref b_raw = g.reshape(nn::apply(g, store, dec.b, input), flat, 2);
  out.b = g.add(g.softplus(b_raw), g.constant(Eigen::MatrixXd::Constant(flat, 2, cfg.b_floor)));
  out.pi = g.softmax_rows(nn::apply(g, store, dec.pi, input));
  return out;
}

}  // namespace hypercast
