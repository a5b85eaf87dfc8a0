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

#ifndef HYPERCAST_AUTODIFF_HPP_
#define HYPERCAST_AUTODIFF_HPP_

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hypercast::ad
{

/// Handle into a Graph's node tape.
struct Ref
{
  int i = -1;
  bool valid() const { return i >= 0; }
};

/// Reverse-mode tape over dense double matrices. Nodes are appended in
/// forward order; backward() walks the tape in reverse. Parameter leaves are
/// registered by name and deduplicated, so two call sites naming the same
/// parameter share one node (and therefore accumulate into one gradient).
class Graph
{
public:
  Graph() = default;
  Graph(const Graph &) = delete;
  Graph & operator=(const Graph &) = delete;

  // Leaves.
  Ref constant(Eigen::MatrixXd v);
  Ref zeros(int rows, int cols) { return constant(Eigen::MatrixXd::Zero(rows, cols)); }
  Ref param(const std::string & name, const Eigen::MatrixXd & value);

  // Arithmetic.
  Ref add(Ref a, Ref b);
  Ref sub(Ref a, Ref b);
  Ref mul(Ref a, Ref b);                  // elementwise
  Ref div(Ref a, Ref b);                  // elementwise
  Ref scale(Ref a, double s);
  Ref add_bias(Ref a, Ref bias);          // bias is 1 x C, broadcast over rows
  Ref matmul(Ref a, Ref b);
  Ref transpose(Ref a);

  // Elementwise nonlinearities.
  Ref relu(Ref a);
  Ref sigmoid(Ref a);
  Ref tanh_(Ref a);
  Ref softplus(Ref a);
  Ref exp_(Ref a);
  Ref log_(Ref a);
  Ref abs_(Ref a);
  Ref square(Ref a);
  Ref clamp_min(Ref a, double floor);
  Ref smooth_l1(Ref a);  // 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise

  // Row-structured ops.
  Ref softmax_rows(Ref a);
  Ref masked_softmax_rows(Ref a, const Eigen::MatrixXd & mask01);
  Ref layer_norm(Ref x, Ref gain, Ref bias);  // per-row, eps 1e-5
  Ref div_rowwise(Ref a, Ref col);            // col is R x 1
  Ref cumsum_rows(Ref a, int block = 0);      // restarts every `block` rows (0 = whole)

  // Shape ops.
  Ref concat_cols(const std::vector<Ref> & parts);
  Ref concat_rows(const std::vector<Ref> & parts);
  Ref slice_rows(Ref a, int row0, int nrows);
  Ref slice_cols(Ref a, int col0, int ncols);
  Ref select_rows(Ref a, std::vector<int> indices);
  Ref reshape(Ref a, int rows, int cols);     // row-major reinterpretation

  // Reductions.
  Ref sum_all(Ref a);    // 1 x 1
  Ref mean_all(Ref a);   // 1 x 1
  Ref row_sum(Ref a);    // R x 1
  Ref col_sum(Ref a);    // 1 x C
  Ref scalar_div(Ref a, Ref s);  // s is 1 x 1

  const Eigen::MatrixXd & value(Ref r) const { return nodes_[r.i].value; }
  double scalar(Ref r) const;

  /// Back-propagate from a 1x1 root. Parameter gradients are then available
  /// through param_grads().
  void backward(Ref root);

  /// Named parameter gradients accumulated by the last backward() call.
  /// Only parameters actually touched by the graph appear.
  std::vector<std::pair<std::string, const Eigen::MatrixXd *>> param_grads() const;

  size_t size() const { return nodes_.size(); }

private:
  struct Node
  {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;  // sized lazily during backward
    bool needs_grad = false;
    std::function<void(Graph &)> back;
    std::string param_name;  // set for parameter leaves
  };

  Ref push(Eigen::MatrixXd value, bool needs_grad, std::function<void(Graph &)> back);
  void accumulate(int idx, const Eigen::MatrixXd & g);
  Eigen::MatrixXd & grad_of(int idx) { return nodes_[idx].grad; }
  const Eigen::MatrixXd & val_of(int idx) const { return nodes_[idx].value; }
  bool wants(int idx) const { return nodes_[idx].needs_grad; }

  std::deque<Node> nodes_;
  std::map<std::string, int> param_index_;
  int cursor_ = -1;  // node whose backward closure is currently running
};

}  // namespace hypercast::ad

#endif  // HYPERCAST_AUTODIFF_HPP_
