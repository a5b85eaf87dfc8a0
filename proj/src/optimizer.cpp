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

#include "hypercast/optimizer.hpp"

#include <cmath>

namespace hypercast
{

void AdamW::step(ParamStore & store, double lr)
{
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));

  for (auto & [name, value] : store.mutable_values()) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
    const auto it = store.grads().find(name);
    if (it != store.grads().end()) {
      grad = it->second;
    }

    Eigen::MatrixXd & m =
      m_.try_emplace(name, Eigen::MatrixXd::Zero(value.rows(), value.cols())).first->second;
    Eigen::MatrixXd & v =
      v_.try_emplace(name, Eigen::MatrixXd::Zero(value.rows(), value.cols())).first->second;

    m = opts_.beta1 * m + (1.0 - opts_.beta1) * grad;
    v = opts_.beta2 * v + (1.0 - opts_.beta2) * grad.cwiseProduct(grad);

    const Eigen::ArrayXXd m_hat = m.array() / bc1;
    const Eigen::ArrayXXd v_hat = v.array() / bc2;

    // Decoupled decay: applied to the weights directly, not folded into the
    // gradient, so the adaptive scaling never touches it.
    value.array() -= lr * opts_.weight_decay * value.array();
    value.array() -= lr * m_hat / (v_hat.sqrt() + opts_.eps);
  }
}

double cosine_lr(double base_lr, double min_lr, int epoch, int total_epochs)
{
  if (total_epochs <= 1) {
    return base_lr;
  }
  const double phase =
    M_PI * static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(phase));
}

}  // namespace hypercast
