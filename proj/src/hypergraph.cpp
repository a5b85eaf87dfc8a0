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

#include "hypercast/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hypercast/errors.hpp"

namespace hypercast
{

namespace
{
constexpr double kZeroNorm = 1e-9;
}

Eigen::MatrixXd Hypergraph::incidence() const
{
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(num_vertices, static_cast<int>(hyperedges.size()));
  for (size_t e = 0; e < hyperedges.size(); ++e) {
    for (int v : hyperedges[e]) {
      h(v, static_cast<int>(e)) = 1.0;
    }
  }
  return h;
}

nlohmann::json Hypergraph::debug_json(const Eigen::MatrixXd & aff) const
{
  nlohmann::json j;
  j["num_vertices"] = num_vertices;
  j["hyperedges"] = hyperedges;
  nlohmann::json a = nlohmann::json::array();
  for (int r = 0; r < aff.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < aff.cols(); ++c) {
      row.push_back(aff(r, c));
    }
    a.push_back(std::move(row));
  }
  j["affinity"] = std::move(a);
  const Eigen::MatrixXd h = incidence();
  nlohmann::json hj = nlohmann::json::array();
  for (int r = 0; r < h.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < h.cols(); ++c) {
      row.push_back(static_cast<int>(h(r, c)));
    }
    hj.push_back(std::move(row));
  }
  j["incidence"] = std::move(hj);
  return j;
}

Eigen::MatrixXd affinity(const Eigen::MatrixXd & tau)
{
  const int m = static_cast<int>(tau.rows());
  Eigen::VectorXd norms(m);
  for (int i = 0; i < m; ++i) {
    norms(i) = tau.row(i).norm();
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    if (norms(i) < kZeroNorm) {
      continue;
    }
    a(i, i) = 1.0;
    for (int j = i + 1; j < m; ++j) {
      if (norms(j) < kZeroNorm) {
        continue;
      }
      const double c = tau.row(i).dot(tau.row(j)) / (norms(i) * norms(j));
      a(i, j) = c;
      a(j, i) = c;
    }
  }
  return a;
}

Hypergraph search_hyperedges(const Eigen::MatrixXd & aff, int s)
{
  const int m = static_cast<int>(aff.rows());
  if (aff.cols() != m) {
    throw ShapeMismatch("affinity matrix must be square");
  }
  if (s < 1 || s > m) {
    throw InvalidS("hyperedge size must satisfy 1 <= S <= M");
  }

  auto subset_norm = [&aff](const std::vector<int> & subset) {
    double total = 0.0;
    for (int p : subset) {
      for (int q : subset) {
        total += std::abs(aff(p, q));
      }
    }
    return total;
  };

  Hypergraph hg;
  hg.num_vertices = m;
  std::set<std::vector<int>> seen;

  for (int i = 0; i < m; ++i) {
    // Candidates: the other vertices; combinations enumerated in
    // lexicographic order, which is also lexicographic order of the full
    // subset once i is inserted.
    std::vector<int> others;
    others.reserve(m - 1);
    for (int v = 0; v < m; ++v) {
      if (v != i) {
        others.push_back(v);
      }
    }
    const int pick = s - 1;
    std::vector<int> comb(pick);
    for (int k = 0; k < pick; ++k) {
      comb[k] = k;
    }
    std::vector<int> best;
    double best_score = -1.0;
    while (true) {
      std::vector<int> subset;
      subset.reserve(s);
      subset.push_back(i);
      for (int k = 0; k < pick; ++k) {
        subset.push_back(others[comb[k]]);
      }
      std::sort(subset.begin(), subset.end());
      const double score = subset_norm(subset);
      if (score > best_score) {
        best_score = score;
        best = subset;
      }
      // Advance to the next combination.
      int k = pick - 1;
      while (k >= 0 && comb[k] == static_cast<int>(others.size()) - pick + k) {
        --k;
      }
      if (k < 0) {
        break;
      }
      ++comb[k];
      for (int k2 = k + 1; k2 < pick; ++k2) {
        comb[k2] = comb[k2 - 1] + 1;
      }
    }
    if (seen.insert(best).second) {
      hg.hyperedges.push_back(std::move(best));
    }
  }
  return hg;
}

TpnBlocks make_tpn(ParamStore & store, Rng & rng, const ModelConfig & cfg)
{
  const int d = cfg.hidden_dim;
  TpnBlocks tpn;
  tpn.fuse = nn::make_mlp2(store, rng, "tpn.fuse", 2 * d, d, d);
  tpn.hyperedge = nn::make_mlp2(store, rng, "tpn.hyperedge", d, d, d, false);
  tpn.node = nn::make_mlp2(store, rng, "tpn.node", 2 * d, d, d, false);
  tpn.low_order = nn::make_mlp2(store, rng, "tpn.low_order", d, d, d, false);
  tpn.gate = nn::make_linear(store, rng, "tpn.gate", d, d);
  // Zero-initialized injection keeps the main decoder's input, and therefore
  // its output, bitwise equal to the auxiliary decoder's right after the
  // weight copy; the hypergraph path fades in through training.
  tpn.inject = nn::make_linear(store, rng, "tpn.inject", d, 2 * d, true, false);
  tpn.main_dec = make_decoder(store, rng, "main_dec", cfg);
  return tpn;
}

MessagePassOut message_pass(
  ad::Graph & g, const ParamStore & store, const TpnBlocks & tpn, const Eigen::MatrixXd & h,
  ad::Ref node_emb, int iterations)
{
  if (h.rows() != g.value(node_emb).rows()) {
    throw ShapeMismatch("incidence rows must match node count");
  }
  ad::Ref hc = g.constant(h);
  ad::Ref ht = g.constant(h.transpose());
  MessagePassOut out;
  out.nodes = node_emb;
  for (int it = 0; it < iterations; ++it) {
    ad::Ref vertex_sums = g.matmul(ht, out.nodes);
    out.edges = nn::apply(g, store, tpn.hyperedge, vertex_sums);
    ad::Ref gathered = g.matmul(hc, out.edges);
    out.nodes = nn::apply(g, store, tpn.node, g.concat_cols({out.nodes, gathered}));
  }
  return out;
}

ad::Ref gated_fuse(
  ad::Graph & g, const ParamStore & store, const TpnBlocks & tpn, ad::Ref r_high, ad::Ref tau)
{
  ad::Ref omega = g.sigmoid(nn::apply(g, store, tpn.gate, tau));
  ad::Ref r_low = nn::apply(g, store, tpn.low_order, tau);
  const Eigen::MatrixXd & ov = g.value(omega);
  ad::Ref one_minus =
    g.sub(g.constant(Eigen::MatrixXd::Ones(ov.rows(), ov.cols())), omega);
  return g.add(g.mul(r_high, omega), g.mul(r_low, one_minus));
}

}  // namespace hypercast
