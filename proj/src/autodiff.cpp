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

#include "hypercast/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "hypercast/errors.hpp"

namespace hypercast::ad
{

namespace
{

constexpr double kLayerNormEps = 1e-5;

void check_same_shape(const Eigen::MatrixXd & a, const Eigen::MatrixXd & b, const char * op)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(
      std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
      " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Ref Graph::push(Eigen::MatrixXd value, bool needs_grad, std::function<void(Graph &)> back)
{
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Ref{static_cast<int>(nodes_.size()) - 1};
}

void Graph::accumulate(int idx, const Eigen::MatrixXd & g)
{
  Node & n = nodes_[idx];
  if (!n.needs_grad) {
    return;
  }
  if (n.grad.size() == 0) {
    n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  }
  n.grad += g;
}

Ref Graph::constant(Eigen::MatrixXd v)
{
  return push(std::move(v), false, nullptr);
}

Ref Graph::param(const std::string & name, const Eigen::MatrixXd & value)
{
  auto it = param_index_.find(name);
  if (it != param_index_.end()) {
    return Ref{it->second};
  }
  Ref r = push(value, true, nullptr);
  nodes_[r.i].param_name = name;
  param_index_[name] = r.i;
  return r;
}

Ref Graph::add(Ref a, Ref b)
{
  check_same_shape(val_of(a.i), val_of(b.i), "add");
  Eigen::MatrixXd v = val_of(a.i) + val_of(b.i);
  bool ng = wants(a.i) || wants(b.i);
  int ai = a.i, bi = b.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go);
    g.accumulate(bi, go);
  });
}

Ref Graph::sub(Ref a, Ref b)
{
  check_same_shape(val_of(a.i), val_of(b.i), "sub");
  Eigen::MatrixXd v = val_of(a.i) - val_of(b.i);
  bool ng = wants(a.i) || wants(b.i);
  int ai = a.i, bi = b.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go);
    g.accumulate(bi, -go);
  });
}

Ref Graph::mul(Ref a, Ref b)
{
  check_same_shape(val_of(a.i), val_of(b.i), "mul");
  Eigen::MatrixXd v = val_of(a.i).cwiseProduct(val_of(b.i));
  bool ng = wants(a.i) || wants(b.i);
  int ai = a.i, bi = b.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go.cwiseProduct(g.val_of(bi)));
    g.accumulate(bi, go.cwiseProduct(g.val_of(ai)));
  });
}

Ref Graph::div(Ref a, Ref b)
{
  check_same_shape(val_of(a.i), val_of(b.i), "div");
  Eigen::MatrixXd v = val_of(a.i).cwiseQuotient(val_of(b.i));
  bool ng = wants(a.i) || wants(b.i);
  int ai = a.i, bi = b.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    const Eigen::MatrixXd & bv = g.val_of(bi);
    g.accumulate(ai, go.cwiseQuotient(bv));
    g.accumulate(
      bi, -go.cwiseProduct(g.val_of(ai)).cwiseQuotient(bv.cwiseProduct(bv)));
  });
}

Ref Graph::scale(Ref a, double s)
{
  Eigen::MatrixXd v = val_of(a.i) * s;
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, s](Graph & g) {
    g.accumulate(ai, g.grad_of(g.cursor_) * s);
  });
}

Ref Graph::add_bias(Ref a, Ref bias)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  const Eigen::MatrixXd & bv = val_of(bias.i);
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeMismatch("add_bias: bias must be 1 x cols(a)");
  }
  Eigen::MatrixXd v = av.rowwise() + bv.row(0);
  bool ng = wants(a.i) || wants(bias.i);
  int ai = a.i, bi = bias.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go);
    g.accumulate(bi, go.colwise().sum());
  });
}

Ref Graph::matmul(Ref a, Ref b)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  const Eigen::MatrixXd & bv = val_of(b.i);
  if (av.cols() != bv.rows()) {
    throw ShapeMismatch("matmul: inner dimensions disagree");
  }
  Eigen::MatrixXd v = av * bv;
  bool ng = wants(a.i) || wants(b.i);
  int ai = a.i, bi = b.i;
  return push(std::move(v), ng, [ai, bi](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go * g.val_of(bi).transpose());
    g.accumulate(bi, g.val_of(ai).transpose() * go);
  });
}

Ref Graph::transpose(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).transpose();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    g.accumulate(ai, g.grad_of(g.cursor_).transpose());
  });
}

Ref Graph::relu(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).cwiseMax(0.0);
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    Eigen::MatrixXd m = (av.array() > 0.0).cast<double>();
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(m));
  });
}

Ref Graph::sigmoid(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).unaryExpr([](double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & y = g.val_of(g.cursor_);
    Eigen::MatrixXd d = y.array() * (1.0 - y.array());
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(d));
  });
}

Ref Graph::tanh_(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).array().tanh();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & y = g.val_of(g.cursor_);
    Eigen::MatrixXd d = 1.0 - y.array().square();
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(d));
  });
}

Ref Graph::softplus(Ref a)
{
  // max(x, 0) + log1p(exp(-|x|)) is stable for large |x|.
  Eigen::MatrixXd v = val_of(a.i).unaryExpr([](double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  });
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    Eigen::MatrixXd d = g.val_of(ai).unaryExpr([](double x) {
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(d));
  });
}

Ref Graph::exp_(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).array().exp();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(g.val_of(g.cursor_)));
  });
}

Ref Graph::log_(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).array().log();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseQuotient(g.val_of(ai)));
  });
}

Ref Graph::abs_(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).cwiseAbs();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    Eigen::MatrixXd s = g.val_of(ai).unaryExpr([](double x) {
      return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    });
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(s));
  });
}

Ref Graph::square(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).array().square();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    g.accumulate(ai, 2.0 * g.grad_of(g.cursor_).cwiseProduct(g.val_of(ai)));
  });
}

Ref Graph::clamp_min(Ref a, double floor)
{
  Eigen::MatrixXd v = val_of(a.i).cwiseMax(floor);
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, floor](Graph & g) {
    Eigen::MatrixXd m = (g.val_of(ai).array() > floor).cast<double>();
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(m));
  });
}

Ref Graph::smooth_l1(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).unaryExpr([](double x) {
    double ax = std::abs(x);
    return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
  });
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    Eigen::MatrixXd d = g.val_of(ai).unaryExpr([](double x) {
      return std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
    });
    g.accumulate(ai, g.grad_of(g.cursor_).cwiseProduct(d));
  });
}

Ref Graph::softmax_rows(Ref a)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  Eigen::MatrixXd v(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    double m = av.row(r).maxCoeff();
    Eigen::ArrayXd e = (av.row(r).array() - m).exp();
    v.row(r) = e / e.sum();
  }
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & y = g.val_of(g.cursor_);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    Eigen::MatrixXd dx(y.rows(), y.cols());
    for (int r = 0; r < y.rows(); ++r) {
      double dot = y.row(r).dot(go.row(r));
      dx.row(r) = y.row(r).cwiseProduct((go.row(r).array() - dot).matrix());
    }
    g.accumulate(ai, dx);
  });
}

Ref Graph::masked_softmax_rows(Ref a, const Eigen::MatrixXd & mask01)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  check_same_shape(av, mask01, "masked_softmax_rows");
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    double m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < av.cols(); ++c) {
      if (mask01(r, c) > 0.5) {
        m = std::max(m, av(r, c));
      }
    }
    if (!std::isfinite(m)) {
      continue;  // row fully masked: output stays zero
    }
    double denom = 0.0;
    for (int c = 0; c < av.cols(); ++c) {
      if (mask01(r, c) > 0.5) {
        v(r, c) = std::exp(av(r, c) - m);
        denom += v(r, c);
      }
    }
    v.row(r) /= denom;
  }
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    // Masked entries carry y == 0, which zeroes their gradient contributions.
    const Eigen::MatrixXd & y = g.val_of(g.cursor_);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    Eigen::MatrixXd dx(y.rows(), y.cols());
    for (int r = 0; r < y.rows(); ++r) {
      double dot = y.row(r).dot(go.row(r));
      dx.row(r) = y.row(r).cwiseProduct((go.row(r).array() - dot).matrix());
    }
    g.accumulate(ai, dx);
  });
}

Ref Graph::layer_norm(Ref x, Ref gain, Ref bias)
{
  const Eigen::MatrixXd & xv = val_of(x.i);
  const Eigen::MatrixXd & gv = val_of(gain.i);
  const Eigen::MatrixXd & bv = val_of(bias.i);
  if (gv.rows() != 1 || gv.cols() != xv.cols() || bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeMismatch("layer_norm: gain/bias must be 1 x cols(x)");
  }
  const int R = static_cast<int>(xv.rows());
  const int C = static_cast<int>(xv.cols());
  Eigen::MatrixXd xhat(R, C);
  Eigen::VectorXd inv_std(R);
  for (int r = 0; r < R; ++r) {
    double mu = xv.row(r).mean();
    double var = (xv.row(r).array() - mu).square().mean();
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std(r) = is;
    xhat.row(r) = (xv.row(r).array() - mu) * is;
  }
  Eigen::MatrixXd v =
    (xhat.array().rowwise() * gv.row(0).array()).rowwise() + bv.row(0).array();
  bool ng = wants(x.i) || wants(gain.i) || wants(bias.i);
  int xi = x.i, gi = gain.i, bi = bias.i;
  return push(
    std::move(v), ng,
    [xi, gi, bi, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph & g) {
      const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
      const Eigen::MatrixXd & gv2 = g.val_of(gi);
      const int R = static_cast<int>(go.rows());
      const int C = static_cast<int>(go.cols());
      if (g.wants(gi)) {
        g.accumulate(gi, go.cwiseProduct(xhat).colwise().sum());
      }
      if (g.wants(bi)) {
        g.accumulate(bi, go.colwise().sum());
      }
      if (g.wants(xi)) {
        Eigen::MatrixXd dx(R, C);
        for (int r = 0; r < R; ++r) {
          Eigen::RowVectorXd dxh = go.row(r).cwiseProduct(gv2.row(0));
          double m1 = dxh.mean();
          double m2 = dxh.cwiseProduct(xhat.row(r)).mean();
          dx.row(r) =
            (dxh.array() - m1 - xhat.row(r).array() * m2) * inv_std(r);
        }
        g.accumulate(xi, dx);
      }
    });
}

Ref Graph::div_rowwise(Ref a, Ref col)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  const Eigen::MatrixXd & cv = val_of(col.i);
  if (cv.cols() != 1 || cv.rows() != av.rows()) {
    throw ShapeMismatch("div_rowwise: divisor must be rows(a) x 1");
  }
  Eigen::MatrixXd v = av.array().colwise() / cv.col(0).array();
  bool ng = wants(a.i) || wants(col.i);
  int ai = a.i, ci = col.i;
  return push(std::move(v), ng, [ai, ci](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    const Eigen::MatrixXd & av = g.val_of(ai);
    const Eigen::MatrixXd & cv = g.val_of(ci);
    if (g.wants(ai)) {
      g.accumulate(ai, go.array().colwise() / cv.col(0).array());
    }
    if (g.wants(ci)) {
      Eigen::MatrixXd dc =
        -(go.cwiseProduct(av).rowwise().sum().array() / cv.col(0).array().square());
      g.accumulate(ci, dc.matrix());
    }
  });
}

Ref Graph::cumsum_rows(Ref a, int block)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  const int R = static_cast<int>(av.rows());
  const int B = block > 0 ? block : R;
  if (R % B != 0) {
    throw ShapeMismatch("cumsum_rows: rows not a multiple of block");
  }
  Eigen::MatrixXd v = av;
  for (int r = 0; r < R; ++r) {
    if (r % B != 0) {
      v.row(r) += v.row(r - 1);
    }
  }
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, B](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    Eigen::MatrixXd dx = go;
    for (int r = static_cast<int>(go.rows()) - 1; r >= 0; --r) {
      if (r % B != 0) {
        dx.row(r - 1) += dx.row(r);
      }
    }
    g.accumulate(ai, dx);
  });
}

Ref Graph::concat_cols(const std::vector<Ref> & parts)
{
  if (parts.empty()) {
    throw ShapeMismatch("concat_cols: no parts");
  }
  const int R = static_cast<int>(val_of(parts[0].i).rows());
  int C = 0;
  bool ng = false;
  for (Ref p : parts) {
    if (val_of(p.i).rows() != R) {
      throw ShapeMismatch("concat_cols: row counts disagree");
    }
    C += static_cast<int>(val_of(p.i).cols());
    ng = ng || wants(p.i);
  }
  Eigen::MatrixXd v(R, C);
  std::vector<int> idx;
  std::vector<int> offs;
  int c0 = 0;
  for (Ref p : parts) {
    const Eigen::MatrixXd & pv = val_of(p.i);
    v.middleCols(c0, pv.cols()) = pv;
    idx.push_back(p.i);
    offs.push_back(c0);
    c0 += static_cast<int>(pv.cols());
  }
  return push(std::move(v), ng, [idx, offs](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    for (size_t k = 0; k < idx.size(); ++k) {
      int nc = static_cast<int>(g.val_of(idx[k]).cols());
      g.accumulate(idx[k], go.middleCols(offs[k], nc));
    }
  });
}

Ref Graph::concat_rows(const std::vector<Ref> & parts)
{
  if (parts.empty()) {
    throw ShapeMismatch("concat_rows: no parts");
  }
  const int C = static_cast<int>(val_of(parts[0].i).cols());
  int R = 0;
  bool ng = false;
  for (Ref p : parts) {
    if (val_of(p.i).cols() != C) {
      throw ShapeMismatch("concat_rows: column counts disagree");
    }
    R += static_cast<int>(val_of(p.i).rows());
    ng = ng || wants(p.i);
  }
  Eigen::MatrixXd v(R, C);
  std::vector<int> idx;
  std::vector<int> offs;
  int r0 = 0;
  for (Ref p : parts) {
    const Eigen::MatrixXd & pv = val_of(p.i);
    v.middleRows(r0, pv.rows()) = pv;
    idx.push_back(p.i);
    offs.push_back(r0);
    r0 += static_cast<int>(pv.rows());
  }
  return push(std::move(v), ng, [idx, offs](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    for (size_t k = 0; k < idx.size(); ++k) {
      int nr = static_cast<int>(g.val_of(idx[k]).rows());
      g.accumulate(idx[k], go.middleRows(offs[k], nr));
    }
  });
}

Ref Graph::slice_rows(Ref a, int row0, int nrows)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  if (row0 < 0 || nrows < 0 || row0 + nrows > av.rows()) {
    throw ShapeMismatch("slice_rows: out of range");
  }
  Eigen::MatrixXd v = av.middleRows(row0, nrows);
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, row0, nrows](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(av.rows(), av.cols());
    dx.middleRows(row0, nrows) = g.grad_of(g.cursor_);
    g.accumulate(ai, dx);
  });
}

Ref Graph::slice_cols(Ref a, int col0, int ncols)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  if (col0 < 0 || ncols < 0 || col0 + ncols > av.cols()) {
    throw ShapeMismatch("slice_cols: out of range");
  }
  Eigen::MatrixXd v = av.middleCols(col0, ncols);
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, col0, ncols](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(av.rows(), av.cols());
    dx.middleCols(col0, ncols) = g.grad_of(g.cursor_);
    g.accumulate(ai, dx);
  });
}

Ref Graph::select_rows(Ref a, std::vector<int> indices)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  Eigen::MatrixXd v(static_cast<int>(indices.size()), av.cols());
  for (size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] < 0 || indices[r] >= av.rows()) {
      throw ShapeMismatch("select_rows: index out of range");
    }
    v.row(static_cast<int>(r)) = av.row(indices[r]);
  }
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, indices = std::move(indices)](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(av.rows(), av.cols());
    for (size_t r = 0; r < indices.size(); ++r) {
      dx.row(indices[r]) += go.row(static_cast<int>(r));
    }
    g.accumulate(ai, dx);
  });
}

Ref Graph::reshape(Ref a, int rows, int cols)
{
  const Eigen::MatrixXd & av = val_of(a.i);
  if (static_cast<long>(rows) * cols != av.size()) {
    throw ShapeMismatch("reshape: element count mismatch");
  }
  // Row-major reinterpretation, independent of Eigen's storage order.
  Eigen::MatrixXd v(rows, cols);
  const int ac = static_cast<int>(av.cols());
  for (long k = 0; k < av.size(); ++k) {
    v(static_cast<int>(k / cols), static_cast<int>(k % cols)) =
      av(static_cast<int>(k / ac), static_cast<int>(k % ac));
  }
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    Eigen::MatrixXd dx(av.rows(), av.cols());
    const int ac = static_cast<int>(av.cols());
    const int gc = static_cast<int>(go.cols());
    for (long k = 0; k < av.size(); ++k) {
      dx(static_cast<int>(k / ac), static_cast<int>(k % ac)) =
        go(static_cast<int>(k / gc), static_cast<int>(k % gc));
    }
    g.accumulate(ai, dx);
  });
}

Ref Graph::sum_all(Ref a)
{
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = val_of(a.i).sum();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    double go = g.grad_of(g.cursor_)(0, 0);
    g.accumulate(ai, Eigen::MatrixXd::Constant(av.rows(), av.cols(), go));
  });
}

Ref Graph::mean_all(Ref a)
{
  const double n = static_cast<double>(val_of(a.i).size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = val_of(a.i).sum() / n;
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai, n](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    double go = g.grad_of(g.cursor_)(0, 0) / n;
    g.accumulate(ai, Eigen::MatrixXd::Constant(av.rows(), av.cols(), go));
  });
}

Ref Graph::row_sum(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).rowwise().sum();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, go * Eigen::MatrixXd::Ones(1, av.cols()));
  });
}

Ref Graph::col_sum(Ref a)
{
  Eigen::MatrixXd v = val_of(a.i).colwise().sum();
  bool ng = wants(a.i);
  int ai = a.i;
  return push(std::move(v), ng, [ai](Graph & g) {
    const Eigen::MatrixXd & av = g.val_of(ai);
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    g.accumulate(ai, Eigen::MatrixXd::Ones(av.rows(), 1) * go);
  });
}

Ref Graph::scalar_div(Ref a, Ref s)
{
  const Eigen::MatrixXd & sv = val_of(s.i);
  if (sv.rows() != 1 || sv.cols() != 1) {
    throw ShapeMismatch("scalar_div: divisor must be 1 x 1");
  }
  Eigen::MatrixXd v = val_of(a.i) / sv(0, 0);
  bool ng = wants(a.i) || wants(s.i);
  int ai = a.i, si = s.i;
  return push(std::move(v), ng, [ai, si](Graph & g) {
    const Eigen::MatrixXd & go = g.grad_of(g.cursor_);
    double s = g.val_of(si)(0, 0);
    if (g.wants(ai)) {
      g.accumulate(ai, go / s);
    }
    if (g.wants(si)) {
      Eigen::MatrixXd ds(1, 1);
      ds(0, 0) = -go.cwiseProduct(g.val_of(ai)).sum() / (s * s);
      g.accumulate(si, ds);
    }
  });
}

double Graph::scalar(Ref r) const
{
  const Eigen::MatrixXd & v = value(r);
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeMismatch("scalar: node is not 1 x 1");
  }
  return v(0, 0);
}

void Graph::backward(Ref root)
{
  const Eigen::MatrixXd & rv = val_of(root.i);
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ShapeMismatch("backward: root must be 1 x 1");
  }
  for (auto & n : nodes_) {
    n.grad.resize(0, 0);
  }
  nodes_[root.i].grad = Eigen::MatrixXd::Ones(1, 1);
  for (int i = root.i; i >= 0; --i) {
    Node & n = nodes_[i];
    if (!n.needs_grad || !n.back || n.grad.size() == 0) {
      continue;
    }
    cursor_ = i;
    n.back(*this);
  }
}

std::vector<std::pair<std::string, const Eigen::MatrixXd *>> Graph::param_grads() const
{
  std::vector<std::pair<std::string, const Eigen::MatrixXd *>> out;
  out.reserve(param_index_.size());
  for (const auto & [name, idx] : param_index_) {
    if (nodes_[idx].grad.size() != 0) {
      out.emplace_back(name, &nodes_[idx].grad);
    }
  }
  return out;
}

}  // namespace hypercast::ad
