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

#ifndef HYPERCAST_NN_HPP_
#define HYPERCAST_NN_HPP_

#include <string>

#include "hypercast/autodiff.hpp"
#include "hypercast/params.hpp"
#include "hypercast/rng.hpp"

namespace hypercast::nn
{

/// Block builders register their parameters in the store the first time they
/// run and leave existing arrays untouched, so the same construction code
/// serves fresh initialization and checkpoint reload. RNG draws happen only
/// for freshly created arrays.

struct Linear
{
  std::string w;  // in x out
  std::string b;  // 1 x out, empty if the layer has no bias
  int in = 0;
  int out = 0;
};

Linear make_linear(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int out,
  bool zero_init = false, bool bias = true);
ad::Ref apply(ad::Graph & g, const ParamStore & store, const Linear & lin, ad::Ref x);

struct LayerNorm
{
  std::string gain;
  std::string bias;
  int dim = 0;
};

LayerNorm make_layer_norm(ParamStore & store, const std::string & prefix, int dim);
ad::Ref apply(ad::Graph & g, const ParamStore & store, const LayerNorm & ln, ad::Ref x);

/// Two-layer perceptron: Linear -> [LayerNorm] -> ReLU -> Linear.
struct Mlp2
{
  Linear l1;
  LayerNorm ln;
  Linear l2;
  bool use_ln = true;
};

Mlp2 make_mlp2(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden, int out,
  bool use_ln = true);
ad::Ref apply(ad::Graph & g, const ParamStore & store, const Mlp2 & mlp, ad::Ref x);

/// Three-layer perceptron: Linear -> ReLU -> Linear -> ReLU -> Linear.
struct Mlp3
{
  Linear l1;
  Linear l2;
  Linear l3;
};

Mlp3 make_mlp3(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden, int out,
  bool zero_last = false);
ad::Ref apply(ad::Graph & g, const ParamStore & store, const Mlp3 & mlp, ad::Ref x);

/// Single-head scaled dot-product attention with an output projection.
/// Queries and key/value sources may have different widths.
struct Attention
{
  Linear q;
  Linear k;
  Linear v;
  Linear o;
  int dim = 0;
};

Attention make_attention(
  ParamStore & store, Rng & rng, const std::string & prefix, int q_in, int kv_in, int dim);

/// query: R x q_in, keys: C x kv_in; returns R x dim. mask (R x C of 0/1)
/// hides key columns per query row; a fully masked row yields zeros.
ad::Ref apply(
  ad::Graph & g, const ParamStore & store, const Attention & att, ad::Ref query, ad::Ref keys,
  const Eigen::MatrixXd * mask = nullptr);

/// Gated recurrent unit cell; biases live on the input-side linears.
struct GruCell
{
  Linear xz, hz;
  Linear xr, hr;
  Linear xh, hh;
  int hidden = 0;
};

GruCell make_gru(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden);
ad::Ref gru_step(
  ad::Graph & g, const ParamStore & store, const GruCell & cell, ad::Ref x, ad::Ref h);

}  // namespace hypercast::nn

#endif  // HYPERCAST_NN_HPP_
