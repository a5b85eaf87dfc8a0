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

#ifndef HYPERCAST_OPTIMIZER_HPP_
#define HYPERCAST_OPTIMIZER_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>

#include "hypercast/params.hpp"

namespace hypercast
{

/// Adaptive-moment update with decoupled weight decay. Moments are keyed by
/// parameter name; a parameter without a gradient this step still decays.
class AdamW
{
public:
  struct Options
  {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
  };

  explicit AdamW(Options opts) : opts_(opts) {}

  /// One update over every parameter in the store, reading its accumulated
  /// gradient (missing gradients count as zero). `lr` overrides the stored
  /// base rate for this step, letting a schedule drive it.
  void step(ParamStore & store, double lr);
  void step(ParamStore & store) { step(store, opts_.lr); }

  const Options & options() const { return opts_; }
  int64_t steps_taken() const { return t_; }

private:
  Options opts_;
  int64_t t_ = 0;
  std::map<std::string, Eigen::MatrixXd> m_;
  std::map<std::string, Eigen::MatrixXd> v_;
};

/// Cosine annealing from `base_lr` to `min_lr` across `total_epochs`.
/// Epoch 0 returns base_lr; the final epoch approaches min_lr.
double cosine_lr(double base_lr, double min_lr, int epoch, int total_epochs);

}  // namespace hypercast

#endif  // HYPERCAST_OPTIMIZER_HPP_
