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

#ifndef HYPERCAST_LOSSES_HPP_
#define HYPERCAST_LOSSES_HPP_

#include <Eigen/Dense>

#include "hypercast/autodiff.hpp"
#include "hypercast/model.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// Winner-takes-all mode selection: index minimizing the summed per-step
/// Euclidean error. `pred` stacks the K modes as (K*N) x 2; `gt` is N x 2 in
/// the same frame. Ties resolve to the smallest index. Throws NoGroundTruth
/// when gt is empty.
int best_mode(const Eigen::MatrixXd & pred, const Eigen::MatrixXd & gt);

/// Per-coordinate independent Laplace negative log-likelihood, averaged over
/// steps: (1/N) sum_t sum_c [log(2 b_c) + |y_c - mu_c| / b_c]. `mu` and `b`
/// are the selected mode's N x 2 slices on the tape.
ad::Ref laplace_nll(ad::Graph & g, ad::Ref mu, ad::Ref b, const Eigen::MatrixXd & gt);

/// Cross-entropy against a one-hot target at k_star: -log pi_hat[k_star].
ad::Ref confidence_ce(ad::Graph & g, ad::Ref pi_row, int k_star);

/// Cross-entropy against a dense target distribution (soft-label variant).
ad::Ref confidence_ce_soft(ad::Graph & g, ad::Ref pi_row, const Eigen::VectorXd & target);

/// Soft classification targets: softmax over the negative mean displacement
/// error of each mode. An artifact-defined alternative to the one-hot
/// default, selected by configuration.
Eigen::VectorXd soft_targets(const Eigen::MatrixXd & pred, const Eigen::MatrixXd & gt);

/// Smooth L1 regression averaged over steps, summed over x and y. The
/// |x| = 1 boundary takes the linear branch.
ad::Ref smooth_l1_reg(ad::Graph & g, ad::Ref pred, const Eigen::MatrixXd & gt);

/// Per-stage loss components, each already averaged over the scene's agents
/// with ground truth. Refs beyond the configured stage stay invalid.
struct LossTerms
{
  ad::Ref reg_aux;
  ad::Ref cls_aux;
  ad::Ref reg_base;
  ad::Ref cls_base;
  ad::Ref reg_refine;
  ad::Ref cls_refine;
};

/// Scalar snapshot of one composed loss, for logging.
struct LossReport
{
  double reg_aux = 0.0;
  double cls_aux = 0.0;
  double reg_base = 0.0;
  double cls_base = 0.0;
  double reg_refine = 0.0;
  double cls_refine = 0.0;
  double total = 0.0;
};

/// Builds every loss component the stage defines from one forward pass. Each
/// decoder picks its own winning mode. Throws NoGroundTruth when no agent in
/// the scene has a future.
LossTerms scene_loss_terms(
  ad::Graph & g, const ForwardOut & fwd, const Scene & scene, const ModelConfig & cfg,
  bool soft_labels = false);

/// L_s1 = reg_aux + cls_aux; L_s2 = L_s1 + lambda1 * (base terms);
/// L_s3 = L_s2 + lambda2 * (refine terms). Throws MissingComponent when a
/// required term is missing.
ad::Ref stage_loss(
  ad::Graph & g, int stage, const LossTerms & terms, double lambda1, double lambda2);

LossReport loss_report(const ad::Graph & g, const LossTerms & terms, ad::Ref total);

}  // namespace hypercast

#endif  // HYPERCAST_LOSSES_HPP_
