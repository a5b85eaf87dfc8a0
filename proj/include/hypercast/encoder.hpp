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

#ifndef HYPERCAST_ENCODER_HPP_
#define HYPERCAST_ENCODER_HPP_

#include <vector>

#include "hypercast/config.hpp"
#include "hypercast/nn.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// Laplace-mixture decoder head set: locations, scales, and mixing weights.
/// Used twice, with independent parameter copies, as the coarse (auxiliary)
/// decoder and the proposal (main) decoder.
struct DecoderBlocks
{
  nn::Mlp2 mu;  // 2D -> K*N*2 displacement outputs
  nn::Mlp2 b;   // 2D -> K*N*2 pre-softplus scales
  nn::Mlp2 pi;  // 2D -> K logits
};

struct DecoderOut
{
  ad::Ref mu_disp;  // (M*K*N) x 2 per-step displacements, central frames
  ad::Ref mu_pos;   // (M*K*N) x 2 positions relative to each agent's origin
  ad::Ref b;        // (M*K*N) x 2 scales, >= b_floor
  ad::Ref pi;       // M x K mixing weights (rows on the simplex)
};

/// Shared global interactor: frame-aware cross-attention over agents with a
/// residual from the input features. The refinement stage reuses the same
/// parameter set on its trajectory embeddings.
struct GiBlocks
{
  nn::Attention attn;  // queries D, keys/values 2D (features + pair embedding)
  nn::LayerNorm ln;
};

/// Local scene encoder blocks plus the auxiliary decoder.
struct CtnBlocks
{
  nn::Mlp2 center;  // (2 + agent_attr) -> D
  nn::Mlp2 nbr;     // (4 + agent_attr) -> D
  nn::Mlp2 lane;    // (4 + lane_attr) -> D
  nn::Mlp2 rel;     // 4 -> D pairwise frame embedding

  nn::Attention step_attn;  // agent-agent attention within one time step
  nn::LayerNorm step_ln;
  std::string pos_enc;      // (T_obs - 1) x D learned positional table
  std::string temporal_q;   // 1 x D learned temporal query
  nn::Attention temporal_attn;
  nn::LayerNorm temporal_ln;
  nn::Attention lane_attn;
  nn::LayerNorm local_ln;

  GiBlocks gi;
  DecoderBlocks aux_dec;
};

CtnBlocks make_ctn(ParamStore & store, Rng & rng, const ModelConfig & cfg);
DecoderBlocks make_decoder(
  ParamStore & store, Rng & rng, const std::string & prefix, const ModelConfig & cfg);

/// Per-agent local embedding psi_local, one row per agent. `geoms` holds the
/// frame-invariant features of every agent in scene order.
ad::Ref embed_local(
  ad::Graph & g, const ParamStore & store, const CtnBlocks & ctn,
  const std::vector<GeomFeatures> & geoms, const ModelConfig & cfg);

/// Pairwise frame embeddings s_ij, laid out row-major: row i*M + j.
ad::Ref pair_embeddings(
  ad::Graph & g, const ParamStore & store, const CtnBlocks & ctn,
  const std::vector<GeomFeatures> & geoms);

/// One round of frame-aware cross-attention over agents (keys and values see
/// [feature_j, s_ij]); residual + layer norm. `features` is M x D, `s` is
/// (M*M) x D.
ad::Ref global_interact(
  ad::Graph & g, const ParamStore & store, const GiBlocks & gi, ad::Ref features, ad::Ref s);

/// Decoder heads over per-agent inputs (M x 2D). Displacement outputs are
/// accumulated into positions relative to each agent's frame origin.
DecoderOut apply_decoder(
  ad::Graph & g, const ParamStore & store, const DecoderBlocks & dec, ad::Ref input,
  const ModelConfig & cfg);

}  // namespace hypercast

#endif  // HYPERCAST_ENCODER_HPP_
