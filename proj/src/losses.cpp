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

#include "hypercast/losses.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "hypercast/errors.hpp"

namespace hypercast
{

int best_mode(const Eigen::MatrixXd & pred, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  if (n == 0) {
    throw NoGroundTruth("best_mode: empty ground truth");
  }
  if (pred.rows() % n != 0 || pred.cols() != 2 || gt.cols() != 2) {
    throw ShapeMismatch("best_mode: pred must stack modes of the gt length");
  }
  const int k = static_cast<int>(pred.rows()) / n;
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int mode = 0; mode < k; ++mode) {
    double err = 0.0;
    for (int t = 0; t < n; ++t) {
      err += (pred.row(mode * n + t) - gt.row(t)).norm();
    }
    if (err < best_err) {
      best_err = err;
      best = mode;
    }
  }
  return best;
}

ad::Ref laplace_nll(ad::Graph & g, ad::Ref mu, ad::Ref b, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const ad::Ref y = g.constant(gt);
  const ad::Ref residual = g.abs_(g.sub(y, mu));
  const ad::Ref per_coord = g.add(g.log_(g.scale(b, 2.0)), g.div(residual, b));
  return g.scale(g.sum_all(per_coord), 1.0 / n);
}

ad::Ref confidence_ce(ad::Graph & g, ad::Ref pi_row, int k_star)
{
  const ad::Ref picked = g.slice_cols(pi_row, k_star, 1);
  return g.scale(g.log_(picked), -1.0);
}

ad::Ref confidence_ce_soft(ad::Graph & g, ad::Ref pi_row, const Eigen::VectorXd & target)
{
  const ad::Ref q = g.constant(target.transpose());
  return g.scale(g.sum_all(g.mul(q, g.log_(pi_row))), -1.0);
}

Eigen::VectorXd soft_targets(const Eigen::MatrixXd & pred, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const int k = static_cast<int>(pred.rows()) / n;
  Eigen::VectorXd neg_err(k);
  for (int mode = 0; mode < k; ++mode) {
    double err = 0.0;
    for (int t = 0; t < n; ++t) {
      err += (pred.row(mode * n + t) - gt.row(t)).norm();
    }
    neg_err(mode) = -err / n;
  }
  const Eigen::VectorXd shifted = neg_err.array() - neg_err.maxCoeff();
  const Eigen::VectorXd w = shifted.array().exp();
  return w / w.sum();
}

ad::Ref smooth_l1_reg(ad::Graph & g, ad::Ref pred, const Eigen::MatrixXd & gt)
{
  const int n = static_cast<int>(gt.rows());
  const ad::Ref y = g.constant(gt);
  return g.scale(g.sum_all(g.smooth_l1(g.sub(pred, y))), 1.0 / n);
}

namespace
{

struct DecoderLoss
{
  ad::Ref reg;
  ad::Ref cls;
};

/// Winner-takes-all regression plus classification for one decoder's output
/// over every agent with ground truth, averaged. `smooth` switches the
/// regression from Laplace NLL to Smooth L1 (the refinement head has no
/// scale output).
DecoderLoss decoder_loss(
  ad::Graph & g, ad::Ref mu_pos, ad::Ref b, ad::Ref pi, const std::vector<int> & agents,
  const std::vector<Eigen::MatrixXd> & gts, const ModelConfig & cfg, bool smooth,
  bool soft_labels)
{
  const int k = cfg.num_modes;
  const int n = cfg.horizon;
  const Eigen::MatrixXd & mu_val = g.value(mu_pos);

  ad::Ref reg;
  ad::Ref cls;
  for (size_t a = 0; a < agents.size(); ++a) {
    const int i = agents[a];
    const Eigen::MatrixXd & gt = gts[a];
    const Eigen::MatrixXd agent_pred = mu_val.block(i * k * n, 0, k * n, 2);
    const int k_star = best_mode(agent_pred, gt);

    const ad::Ref mu_slice = g.slice_rows(mu_pos, (i * k + k_star) * n, n);
    ad::Ref reg_a;
    if (smooth) {
      reg_a = smooth_l1_reg(g, mu_slice, gt);
    } else {
      const ad::Ref b_slice = g.slice_rows(b, (i * k + k_star) * n, n);
      reg_a = laplace_nll(g, mu_slice, b_slice, gt);
    }

    const ad::Ref pi_row = g.slice_rows(pi, i, 1);
    const ad::Ref cls_a = soft_labels
                            ? confidence_ce_soft(g, pi_row, soft_targets(agent_pred, gt))
                            : confidence_ce(g, pi_row, k_star);

    reg = (reg.i < 0) ? reg_a : g.add(reg, reg_a);
    cls = (cls.i < 0) ? cls_a : g.add(cls, cls_a);
  }
  const double inv = 1.0 / static_cast<double>(agents.size());
  return {g.scale(reg, inv), g.scale(cls, inv)};
}

}  // namespace

LossTerms scene_loss_terms(
  ad::Graph & g, const ForwardOut & fwd, const Scene & scene, const ModelConfig & cfg,
  bool soft_labels)
{
  // Ground truth enters each agent's own frame, matching the decoder output.
  std::vector<int> agents;
  std::vector<Eigen::MatrixXd> gts;
  for (int i = 0; i < static_cast<int>(scene.agents.size()); ++i) {
    const std::vector<Vec2> * gt = scene.gt_for(scene.agents[i].id);
    if (gt == nullptr) {
      continue;
    }
    if (static_cast<int>(gt->size()) != cfg.horizon) {
      throw ShapeMismatch("scene_loss_terms: ground truth length mismatch");
    }
    const ReferenceFrame & frame = fwd.geoms[i].frame;
    Eigen::MatrixXd local(cfg.horizon, 2);
    for (int t = 0; t < cfg.horizon; ++t) {
      const Vec2 v = frame.to_local((*gt)[t] - frame.origin);
      local(t, 0) = v.x();
      local(t, 1) = v.y();
    }
    agents.push_back(i);
    gts.push_back(std::move(local));
  }
  if (agents.empty()) {
    throw NoGroundTruth("scene_loss_terms: no agent has a future");
  }

  LossTerms terms;
  const DecoderLoss aux =
    decoder_loss(g, fwd.aux.mu_pos, fwd.aux.b, fwd.aux.pi, agents, gts, cfg, false, soft_labels);
  terms.reg_aux = aux.reg;
  terms.cls_aux = aux.cls;

  if (cfg.stage >= 2) {
    const DecoderLoss base = decoder_loss(
      g, fwd.base.mu_pos, fwd.base.b, fwd.base.pi, agents, gts, cfg, false, soft_labels);
    terms.reg_base = base.reg;
    terms.cls_base = base.cls;
  }
  if (cfg.stage >= 3) {
    const DecoderLoss refine = decoder_loss(
      g, fwd.refined.refined_pos, ad::Ref{}, fwd.refined.refined_pi, agents, gts, cfg, true,
      soft_labels);
    terms.reg_refine = refine.reg;
    terms.cls_refine = refine.cls;
  }
  return terms;
}

ad::Ref stage_loss(
  ad::Graph & g, int stage, const LossTerms & terms, double lambda1, double lambda2)
{
  if (terms.reg_aux.i < 0 || terms.cls_aux.i < 0) {
    throw MissingComponent("stage_loss: auxiliary terms missing");
  }
  ad::Ref total = g.add(terms.reg_aux, terms.cls_aux);
  if (stage >= 2) {
    if (terms.reg_base.i < 0 || terms.cls_base.i < 0) {
      throw MissingComponent("stage_loss: proposal terms missing");
    }
    total = g.add(total, g.scale(g.add(terms.reg_base, terms.cls_base), lambda1));
  }
  if (stage >= 3) {
    if (terms.reg_refine.i < 0 || terms.cls_refine.i < 0) {
      throw MissingComponent("stage_loss: refinement terms missing");
    }
    total = g.add(total, g.scale(g.add(terms.reg_refine, terms.cls_refine), lambda2));
  }
  return total;
}

LossReport loss_report(const ad::Graph & g, const LossTerms & terms, ad::Ref total)
{
  LossReport r;
  r.reg_aux = g.scalar(terms.reg_aux);
  r.cls_aux = g.scalar(terms.cls_aux);
  if (terms.reg_base.i >= 0) {
    r.reg_base = g.scalar(terms.reg_base);
    r.cls_base = g.scalar(terms.cls_base);
  }
  if (terms.reg_refine.i >= 0) {
    r.reg_refine = g.scalar(terms.reg_refine);
    r.cls_refine = g.scalar(terms.cls_refine);
  }
  r.total = g.scalar(total);
  return r;
}

}  // namespace hypercast
