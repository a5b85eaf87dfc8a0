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

#ifndef HYPERCAST_HYPERGRAPH_HPP_
#define HYPERCAST_HYPERGRAPH_HPP_

#include <Eigen/Dense>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercast/config.hpp"
#include "hypercast/encoder.hpp"
#include "hypercast/nn.hpp"

namespace hypercast
{

/// Vertex groups over the agent set. Hyperedges are sorted vertex-index
/// subsets, deduplicated, in first-discovery order (by searching agent).
struct Hypergraph
{
  int num_vertices = 0;
  std::vector<std::vector<int>> hyperedges;

  /// M x |E| binary incidence matrix.
  Eigen::MatrixXd incidence() const;

  /// Inspection dump: affinity, hyperedges, and incidence, stably ordered.
  nlohmann::json debug_json(const Eigen::MatrixXd & affinity) const;
};

/// Pairwise cosine similarity of future features (rows of tau). A row whose
/// norm falls below 1e-9 gets zero affinity everywhere, itself included.
Eigen::MatrixXd affinity(const Eigen::MatrixXd & tau);

/// Per-agent exhaustive search: for each vertex i the size-S subset
/// containing i that maximizes the entrywise L1 norm of the affinity
/// submatrix. Ties pick the lexicographically smallest subset; duplicates
/// across agents are merged. Throws InvalidS unless 1 <= S <= M.
Hypergraph search_hyperedges(const Eigen::MatrixXd & affinity, int s);

/// Hyper-Interactor blocks plus the proposal (main) decoder.
struct TpnBlocks
{
  nn::Mlp2 fuse;        // 2D -> D future feature tau
  nn::Mlp2 hyperedge;   // D -> D, plain (vertex sum -> hyperedge embedding)
  nn::Mlp2 node;        // 2D -> D, plain (node update from gathered edges)
  nn::Mlp2 low_order;   // D -> D, plain residual branch
  nn::Linear gate;      // D -> D pre-sigmoid mixing weights
  nn::Linear inject;    // D -> 2D, zero-initialized, biasless
  DecoderBlocks main_dec;
};

TpnBlocks make_tpn(ParamStore & store, Rng & rng, const ModelConfig & cfg);

struct MessagePassOut
{
  ad::Ref nodes;  // M x D updated node embeddings (r_high)
  ad::Ref edges;  // |E| x D hyperedge embeddings from the last iteration
};

/// Node -> hyperedge -> node message passing over a fixed incidence matrix.
/// The topology is non-differentiable structure; gradients flow through the
/// embeddings only.
MessagePassOut message_pass(
  ad::Graph & g, const ParamStore & store, const TpnBlocks & tpn, const Eigen::MatrixXd & h,
  ad::Ref node_emb, int iterations);

/// psi_hyper = r_high (*) omega + r_low (*) (1 - omega), with
/// omega = sigmoid(gate(tau)) and r_low a learned transform of tau.
ad::Ref gated_fuse(
  ad::Graph & g, const ParamStore & store, const TpnBlocks & tpn, ad::Ref r_high, ad::Ref tau);

}  // namespace hypercast

#endif  // HYPERCAST_HYPERGRAPH_HPP_
