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

#include <cmath>

#include <doctest.h>

#include "hypercast/nn.hpp"
#include "hypercast/optimizer.hpp"
#include "hypercast/rng.hpp"

namespace
{

using hypercast::ParamStore;
using hypercast::Rng;
using hypercast::ad::Graph;
using hypercast::ad::Ref;
namespace nn = hypercast::nn;

Eigen::MatrixXd random_matrix(Rng & rng, int rows, int cols)
{
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.normal(0.0, 1.0);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("linear layer computes x*W + b")
{
  ParamStore store;
  Rng rng(1);
  const nn::Linear lin = nn::make_linear(store, rng, "lin", 3, 2);
  const Eigen::MatrixXd w = store.at(lin.w);
  const Eigen::MatrixXd b = store.at(lin.b);

  Graph g;
  Rng data_rng(2);
  const Eigen::MatrixXd x = random_matrix(data_rng, 4, 3);
  const Ref y = nn::apply(g, store, lin, g.constant(x));
  const Eigen::MatrixXd want = (x * w).rowwise() + b.row(0);
  CHECK((g.value(y) - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-initialized linear layer outputs zeros")
{
  ParamStore store;
  Rng rng(3);
  const nn::Linear lin = nn::make_linear(store, rng, "zero", 5, 4, /*zero_init=*/true);
  CHECK(store.at(lin.w).cwiseAbs().maxCoeff() == 0.0);

  Graph g;
  Rng data_rng(4);
  const Ref y = nn::apply(g, store, lin, g.constant(random_matrix(data_rng, 3, 5)));
  CHECK(g.value(y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("biasless linear has no bias parameter")
{
  ParamStore store;
  Rng rng(5);
  const nn::Linear lin = nn::make_linear(store, rng, "nb", 3, 3, false, /*bias=*/false);
  CHECK(lin.b.empty());
  CHECK(store.count() == 1);
}

TEST_CASE("builders reuse existing arrays instead of reinitializing")
{
  ParamStore store;
  Rng rng(6);
  const nn::Linear first = nn::make_linear(store, rng, "lin", 3, 2);
  const Eigen::MatrixXd w = store.at(first.w);
  Rng other(99);
  const nn::Linear second = nn::make_linear(store, other, "lin", 3, 2);
  CHECK(first.w == second.w);
  CHECK((store.at(second.w) - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp2 and mlp3 forward shapes, zero_last head starts at zero")
{
  ParamStore store;
  Rng rng(7);
  const nn::Mlp2 mlp2 = nn::make_mlp2(store, rng, "m2", 4, 8, 3);
  const nn::Mlp3 mlp3 = nn::make_mlp3(store, rng, "m3", 4, 8, 6, /*zero_last=*/true);

  Graph g;
  Rng data_rng(8);
  const Ref x = g.constant(random_matrix(data_rng, 5, 4));
  const Ref y2 = nn::apply(g, store, mlp2, x);
  const Ref y3 = nn::apply(g, store, mlp3, x);
  CHECK(g.value(y2).rows() == 5);
  CHECK(g.value(y2).cols() == 3);
  CHECK(g.value(y3).rows() == 5);
  CHECK(g.value(y3).cols() == 6);
  CHECK(g.value(y3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attention rows are convex mixtures before projection")
{
  // With the value and output projections forced to identity, attention
  // output must lie inside the convex hull of the value rows.
  ParamStore store;
  Rng rng(9);
  const nn::Attention att = nn::make_attention(store, rng, "att", 4, 4, 4);
  store.mutable_at(att.v.w) = Eigen::MatrixXd::Identity(4, 4);
  store.mutable_at(att.v.b).setZero();
  store.mutable_at(att.o.w) = Eigen::MatrixXd::Identity(4, 4);

  Graph g;
  Rng data_rng(10);
  const Eigen::MatrixXd keys = random_matrix(data_rng, 6, 4);
  const Ref out =
    nn::apply(g, store, att, g.constant(random_matrix(data_rng, 3, 4)), g.constant(keys));
  const Eigen::MatrixXd v = g.value(out);
  for (int c = 0; c < 4; ++c) {
    const double lo = keys.col(c).minCoeff();
    const double hi = keys.col(c).maxCoeff();
    for (int r = 0; r < 3; ++r) {
      CHECK(v(r, c) >= lo - 1e-9);
      CHECK(v(r, c) <= hi + 1e-9);
    }
  }
}

TEST_CASE("attention with a fully masked row yields zeros")
{
  ParamStore store;
  Rng rng(11);
  const nn::Attention att = nn::make_attention(store, rng, "att", 4, 4, 4);

  Graph g;
  Rng data_rng(12);
  Eigen::MatrixXd mask(2, 5);
  mask.setOnes();
  mask.row(1).setZero();
  const Ref out = nn::apply(
    g, store, att, g.constant(random_matrix(data_rng, 2, 4)),
    g.constant(random_matrix(data_rng, 5, 4)), &mask);
  CHECK(g.value(out).row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.value(out).row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("attention masking equals physically removing the masked keys")
{
  ParamStore store;
  Rng rng(13);
  const nn::Attention att = nn::make_attention(store, rng, "att", 4, 4, 4);

  Rng data_rng(14);
  const Eigen::MatrixXd query = random_matrix(data_rng, 2, 4);
  const Eigen::MatrixXd keys = random_matrix(data_rng, 5, 4);
  Eigen::MatrixXd mask(2, 5);
  mask.setOnes();
  mask(0, 1) = 0.0;
  mask(0, 3) = 0.0;
  mask(1, 4) = 0.0;

  Graph g1;
  const Eigen::MatrixXd masked =
    g1.value(nn::apply(g1, store, att, g1.constant(query), g1.constant(keys), &mask));

  // Row 0 against only its surviving keys {0, 2, 4}.
  Eigen::MatrixXd kept(3, 4);
  kept.row(0) = keys.row(0);
  kept.row(1) = keys.row(2);
  kept.row(2) = keys.row(4);
  Graph g2;
  const Eigen::MatrixXd direct = g2.value(
    nn::apply(g2, store, att, g2.constant(query.topRows(1)), g2.constant(kept)));
  CHECK((masked.row(0) - direct.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru step keeps state within tanh range and matches manual formula")
{
  ParamStore store;
  Rng rng(15);
  const int hidden = 3;
  const nn::GruCell cell = nn::make_gru(store, rng, "gru", 2, hidden);

  Rng data_rng(16);
  const Eigen::MatrixXd x = random_matrix(data_rng, 4, 2);
  const Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(4, hidden);

  Graph g;
  const Ref h1 = nn::gru_step(g, store, cell, g.constant(x), g.constant(h0));
  const Eigen::MatrixXd v = g.value(h1);
  CHECK(v.rows() == 4);
  CHECK(v.cols() == hidden);
  CHECK(v.cwiseAbs().maxCoeff() < 1.0);

  // Manual recomputation of one entry chain.
  const auto affine = [&](const nn::Linear & lin, const Eigen::MatrixXd & in) {
    Eigen::MatrixXd out = in * store.at(lin.w);
    if (!lin.b.empty()) {
      out.rowwise() += store.at(lin.b).row(0);
    }
    return out;
  };
  const auto sigmoid = [](const Eigen::MatrixXd & m) {
    return ((-m.array()).exp() + 1.0).inverse().matrix();
  };
  const Eigen::MatrixXd z = sigmoid(affine(cell.xz, x) + affine(cell.hz, h0));
  const Eigen::MatrixXd r = sigmoid(affine(cell.xr, x) + affine(cell.hr, h0));
  const Eigen::MatrixXd cand =
    (affine(cell.xh, x) + affine(cell.hh, r.cwiseProduct(h0))).array().tanh().matrix();
  const Eigen::MatrixXd want =
    ((1.0 - z.array()) * h0.array() + z.array() * cand.array()).matrix();
  CHECK((v - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adamw reduces a convex quadratic and decays unused weights")
{
  ParamStore store;
  store.add("w", Eigen::MatrixXd::Constant(1, 1, 5.0));
  store.add("idle", Eigen::MatrixXd::Constant(1, 1, 1.0));

  hypercast::AdamW::Options opt;
  opt.lr = 0.1;
  opt.weight_decay = 0.01;
  hypercast::AdamW adam(opt);
  for (int i = 0; i < 200; ++i) {
    Graph g;
    const Ref w = g.param("w", store.at("w"));
    g.backward(g.sum_all(g.square(w)));
    store.zero_grads();
    store.accumulate_grads(g);
    adam.step(store, opt.lr);
  }
  CHECK(std::abs(store.at("w")(0, 0)) < 1e-2);
  // Decoupled decay shrinks parameters that never receive gradients.
  CHECK(store.at("idle")(0, 0) < 1.0);
  CHECK(store.at("idle")(0, 0) > 0.5);
}

TEST_CASE("cosine schedule endpoints and midpoint")
{
  const double base = 1e-3;
  CHECK(hypercast::cosine_lr(base, 0.0, 0, 64) == doctest::Approx(base));
  CHECK(hypercast::cosine_lr(base, 0.0, 63, 64) == doctest::Approx(0.0).epsilon(1e-12));
  // Halfway through the phase the multiplier is exactly 0.5 for odd spacing.
  const double mid = hypercast::cosine_lr(base, 0.0, 31, 63);  // phase pi/2... epoch 31 of 63
  CHECK(mid == doctest::Approx(base * 0.5));
  CHECK(hypercast::cosine_lr(base, 0.0, 0, 1) == doctest::Approx(base));
  const double floor = hypercast::cosine_lr(base, 1e-5, 63, 64);
  CHECK(floor == doctest::Approx(1e-5));
}
