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

#include "hypercast/nn.hpp"

#include <cmath>

namespace hypercast::nn
{

namespace
{

void ensure(
  ParamStore & store, Rng & rng, const std::string & name, int rows, int cols, int fan_in,
  bool zero)
{
  if (store.has(name)) {
    return;
  }
  if (zero) {
    store.add(name, Eigen::MatrixXd::Zero(rows, cols));
  } else {
    store.add(name, kaiming_uniform(rng, rows, cols, fan_in));
  }
}

}  // namespace

Linear make_linear(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int out, bool zero_init,
  bool bias)
{
  Linear lin;
  lin.in = in;
  lin.out = out;
  lin.w = prefix + ".w";
  ensure(store, rng, lin.w, in, out, in, zero_init);
  if (bias) {
    lin.b = prefix + ".b";
    ensure(store, rng, lin.b, 1, out, in, true);
  }
  return lin;
}

ad::Ref apply(ad::Graph & g, const ParamStore & store, const Linear & lin, ad::Ref x)
{
  ad::Ref y = g.matmul(x, store.use(g, lin.w));
  if (!lin.b.empty()) {
    y = g.add_bias(y, store.use(g, lin.b));
  }
  return y;
}

LayerNorm make_layer_norm(ParamStore & store, const std::string & prefix, int dim)
{
  LayerNorm ln;
  ln.dim = dim;
  ln.gain = prefix + ".gain";
  ln.bias = prefix + ".bias";
  if (!store.has(ln.gain)) {
    store.add(ln.gain, Eigen::MatrixXd::Ones(1, dim));
  }
  if (!store.has(ln.bias)) {
    store.add(ln.bias, Eigen::MatrixXd::Zero(1, dim));
  }
  return ln;
}

ad::Ref apply(ad::Graph & g, const ParamStore & store, const LayerNorm & ln, ad::Ref x)
{
  return g.layer_norm(x, store.use(g, ln.gain), store.use(g, ln.bias));
}

Mlp2 make_mlp2(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden, int out,
  bool use_ln)
{
  Mlp2 mlp;
  mlp.use_ln = use_ln;
  mlp.l1 = make_linear(store, rng, prefix + ".l1", in, hidden);
  if (use_ln) {
    mlp.ln = make_layer_norm(store, prefix + ".ln", hidden);
  }
  mlp.l2 = make_linear(store, rng, prefix + ".l2", hidden, out);
  return mlp;
}

ad::Ref apply(ad::Graph & g, const ParamStore & store, const Mlp2 & mlp, ad::Ref x)
{
  ad::Ref h = apply(g, store, mlp.l1, x);
  if (mlp.use_ln) {
    h = apply(g, store, mlp.ln, h);
  }
  h = g.relu(h);
  return apply(g, store, mlp.l2, h);
}

Mlp3 make_mlp3(
  ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden, int out,
  bool zero_last)
{
  Mlp3 mlp;
  mlp.l1 = make_linear(store, rng, prefix + ".l1", in, hidden);
  mlp.l2 = make_linear(store, rng, prefix + ".l2", hidden, hidden);
  mlp.l3 = make_linear(store, rng, prefix + ".l3", hidden, out, zero_last);
  return mlp;
}

ad::Ref apply(ad::Graph & g, const ParamStore & store, const Mlp3 & mlp, ad::Ref x)
{
  ad::Ref h = g.relu(apply(g, store, mlp.l1, x));
  h = g.relu(apply(g, store, mlp.l2, h));
  return apply(g, store, mlp.l3, h);
}

Attention make_attention(
  ParamStore & store, Rng & rng, const std::string & prefix, int q_in, int kv_in, int dim)
{
  Attention att;
  att.dim = dim;
  att.q = make_linear(store, rng, prefix + ".q", q_in, dim);
  att.k = make_linear(store, rng, prefix + ".k", kv_in, dim);
  att.v = make_linear(store, rng, prefix + ".v", kv_in, dim);
  // Biasless output projection: a fully masked attention then contributes
  // exactly zero to its residual.
  att.o = make_linear(store, rng, prefix + ".o", dim, dim, false, false);
  return att;
}

ad::Ref apply(
  ad::Graph & g, const ParamStore & store, const Attention & att, ad::Ref query, ad::Ref keys,
  const Eigen::MatrixXd * mask)
{
  ad::Ref q = apply(g, store, att.q, query);
  ad::Ref k = apply(g, store, att.k, keys);
  ad::Ref v = apply(g, store, att.v, keys);
  ad::Ref scores = g.scale(g.matmul(q, g.transpose(k)), 1.0 / std::sqrt(att.dim));
  ad::Ref alpha = mask ? g.masked_softmax_rows(scores, *mask) : g.softmax_rows(scores);
  return apply(g, store, att.o, g.matmul(alpha, v));
}

GruCell make_gru(ParamStore & store, Rng & rng, const std::string & prefix, int in, int hidden)
{
  GruCell cell;
  cell.hidden = hidden;
  cell.xz = make_linear(store, rng, prefix + ".xz", in, hidden);
  cell.hz = make_linear(store, rng, prefix + ".hz", hidden, hidden, false, false);
  cell.xr = make_linear(store, rng, prefix + ".xr", in, hidden);
  cell.hr = make_linear(store, rng, prefix + ".hr", hidden, hidden, false, false);
  cell.xh = make_linear(store, rng, prefix + ".xh", in, hidden);
  cell.hh = make_linear(store, rng, prefix + ".hh", hidden, hidden, false, false);
  return cell;
}

ad::Ref gru_step(
  ad::Graph & g, const ParamStore & store, const GruCell & cell, ad::Ref x, ad::Ref h)
{
  ad::Ref z = g.sigmoid(g.add(apply(g, store, cell.xz, x), apply(g, store, cell.hz, h)));
  ad::Ref r = g.sigmoid(g.add(apply(g, store, cell.xr, x), apply(g, store, cell.hr, h)));
  ad::Ref cand =
    g.tanh_(g.add(apply(g, store, cell.xh, x), apply(g, store, cell.hh, g.mul(r, h))));
  // h' = (1 - z) (*) h + z (*) cand
  ad::Ref one_minus_z = g.scale(g.sub(z, g.constant(Eigen::MatrixXd::Ones(
                                  g.value(z).rows(), g.value(z).cols()))), -1.0);
  return g.add(g.mul(one_minus_z, h), g.mul(z, cand));
}

}  // namespace hypercast::nn
