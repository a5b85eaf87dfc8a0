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

#ifndef HYPERCAST_REFINEMENT_HPP_
#define HYPERCAST_REFINEMENT_HPP_

#include <vector>

#include "hypercast/config.hpp"
#include "hypercast/encoder.hpp"
#include "hypercast/nn.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// Trajectory re-encoding and offset heads. The offset heads' output layers
/// start at zero so a freshly extended model reproduces its proposals
/// exactly until training moves them.
struct PrnBlocks
{
  nn::GruCell gru_fwd;   // input 2, hidden D/2
  nn::GruCell gru_bwd;
  nn::Mlp3 consist;      // D -> D
  nn::Mlp3 refine_mu;    // 5D -> N*2, zero-initialized output layer
  nn::Mlp3 refine_pi;    // 5D -> 1, zero-initialized output layer
};

PrnBlocks make_prn(ParamStore & store, Rng & rng, const ModelConfig & cfg);

/// Bi-directional recurrent encoding of each (agent, mode) full trajectory:
/// observed displacements followed by proposal displacements, T_obs + N
/// tokens (a leading zero token anchors the sequence start). Rows are laid
/// out (agent-major) as i*K + k. Returns (M*K) x D.
ad::Ref encode_full_trajectory(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn,
  const std::vector<GeomFeatures> & geoms, ad::Ref mu_disp, const ModelConfig & cfg);

/// Three-layer consistency extractor, per (agent, mode) row.
ad::Ref consistency_features(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn, ad::Ref eta);

/// Runs the shared Global Interactor over each mode's agent slice of eta,
/// with the same pair embeddings `s` the encoder used. Returns (M*K) x D in
/// i*K + k row order.
ad::Ref post_interaction_features(
  ad::Graph & g, const ParamStore & store, const GiBlocks & gi, ad::Ref eta, ad::Ref s, int m,
  int k);

struct RefineOut
{
  ad::Ref refined_pos;  // (M*K*N) x 2 = base positions + offsets (bitwise additive)
  ad::Ref delta_mu;     // (M*K*N) x 2
  ad::Ref refined_pi;   // M x K, renormalized simplex
  ad::Ref delta_pi;     // M x K
};

/// Offset heads over the concatenated five embeddings (per-agent embeddings
/// broadcast across modes). Confidences are clamped to 1e-6 and renormalized.
RefineOut refine(
  ad::Graph & g, const ParamStore & store, const PrnBlocks & prn, ad::Ref psi_local,
  ad::Ref psi_global, ad::Ref psi_hyper, ad::Ref psi_consist, ad::Ref psi_post,
  const DecoderOut & base, const ModelConfig & cfg);

}  // namespace hypercast

#endif  // HYPERCAST_REFINEMENT_HPP_
