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

#include "hypercast/training.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "hypercast/errors.hpp"
#include "hypercast/optimizer.hpp"
#include "hypercast/rng.hpp"

namespace hypercast
{

void StageRunConfig::validate() const
{
  if (stage < 1 || stage > 3) {
    throw ConfigError("stage must be 1, 2 or 3");
  }
  if (lambda1 <= 0.0 || lambda2 <= 0.0) {
    throw ConfigError("lambda1 and lambda2 must be positive");
  }
  if (lr <= 0.0 || min_lr < 0.0 || min_lr > lr) {
    throw ConfigError("need lr > 0 and 0 <= min_lr <= lr");
  }
  if (batch_size < 1 || epochs < 1 || jobs < 1 || eval_every < 0) {
    throw ConfigError("batch_size, epochs, jobs must be >= 1; eval_every >= 0");
  }
  if (weight_decay < 0.0) {
    throw ConfigError("weight_decay must be >= 0");
  }
}

LossReport scene_backward(
  const Model & model, const Scene & scene, const StageRunConfig & cfg, ad::Graph & g)
{
  const ForwardOut fwd = model.forward(g, scene);
  const LossTerms terms = scene_loss_terms(g, fwd, scene, model.config(), cfg.soft_labels);
  const ad::Ref total = stage_loss(g, cfg.stage, terms, cfg.lambda1, cfg.lambda2);
  g.backward(total);
  return loss_report(g, terms, total);
}

namespace
{

void add_report(LossReport & acc, const LossReport & r)
{
  acc.reg_aux += r.reg_aux;
  acc.cls_aux += r.cls_aux;
  acc.reg_base += r.reg_base;
  acc.cls_base += r.cls_base;
  acc.reg_refine += r.reg_refine;
  acc.cls_refine += r.cls_refine;
  acc.total += r.total;
}

void scale_report(LossReport & acc, double s)
{
  acc.reg_aux *= s;
  acc.cls_aux *= s;
  acc.reg_base *= s;
  acc.cls_base *= s;
  acc.reg_refine *= s;
  acc.cls_refine *= s;
  acc.total *= s;
}

/// Runs one batch: gradients land in the model's store, averaged over the
/// batch. With jobs > 1, worker w takes scenes w, w+jobs, ... and merges
/// its in-order partial sum; merge order is by worker index, so the result
/// depends on the job count only through summation order.
LossReport run_batch(
  Model & model, const std::vector<const Scene *> & batch, const StageRunConfig & cfg)
{
  model.params().zero_grads();
  LossReport epoch_report;

  if (cfg.jobs <= 1 || batch.size() <= 1) {
    for (const Scene * scene : batch) {
      ad::Graph g;
      add_report(epoch_report, scene_backward(model, *scene, cfg, g));
      model.params().accumulate_grads(g);
    }
  } else {
    const int jobs = std::min<int>(cfg.jobs, static_cast<int>(batch.size()));
    std::vector<std::map<std::string, Eigen::MatrixXd>> partials(jobs);
    std::vector<std::vector<LossReport>> reports(jobs);
    std::vector<std::exception_ptr> errors(jobs);

    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (size_t idx = w; idx < batch.size(); idx += jobs) {
            ad::Graph g;
            reports[w].push_back(scene_backward(model, *batch[idx], cfg, g));
            for (const auto & [name, grad] : g.param_grads()) {
              auto it = partials[w].find(name);
              if (it == partials[w].end()) {
                partials[w].emplace(name, *grad);
              } else {
                it->second += *grad;
              }
            }
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread & t : workers) {
      t.join();
    }
    for (const std::exception_ptr & e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }

    auto & grads = model.params().mutable_grads();
    for (int w = 0; w < jobs; ++w) {
      for (const auto & [name, grad] : partials[w]) {
        auto it = grads.find(name);
        if (it == grads.end()) {
          grads.emplace(name, grad);
        } else {
          it->second += grad;
        }
      }
      for (const LossReport & r : reports[w]) {
        add_report(epoch_report, r);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto & [name, grad] : model.params().mutable_grads()) {
    grad *= inv;
  }
  return epoch_report;
}

}  // namespace

MetricValues evaluate_model(const Model & model, const std::vector<Scene> & scenes)
{
  std::vector<SceneEval> evals;
  evals.reserve(scenes.size());
  for (const Scene & scene : scenes) {
    evals.push_back(evaluate_scene(model.predict(scene), scene));
  }
  return aggregate(evals).overall;
}

StageResult run_stage(
  const ModelConfig & model_cfg, const StageRunConfig & run_cfg,
  const std::vector<Scene> & train, const std::vector<Scene> & val,
  const Checkpoint * previous)
{
  run_cfg.validate();
  if (train.empty()) {
    throw EmptyBatch("run_stage: no training scenes");
  }
  if (run_cfg.stage > 1) {
    if (previous == nullptr || previous->stage != run_cfg.stage - 1) {
      throw CheckpointStageMismatch(
        "stage " + std::to_string(run_cfg.stage) + " needs a stage " +
        std::to_string(run_cfg.stage - 1) + " checkpoint");
    }
  } else if (previous != nullptr && previous->stage != 1) {
    throw CheckpointStageMismatch("stage 1 accepts only a stage 1 checkpoint");
  }

  ModelConfig cfg = previous ? ModelConfig::from_json(previous->config) : model_cfg;
  cfg.stage = run_cfg.stage;
  cfg.seed = run_cfg.seed;

  Model model = previous ? Model(cfg, previous->params) : Model(cfg);
  if (run_cfg.stage == 2 && previous->stage == 1) {
    model.copy_aux_to_main();
  }

  AdamW::Options opts;
  opts.lr = run_cfg.lr;
  opts.weight_decay = run_cfg.weight_decay;
  AdamW optimizer(opts);
  Rng shuffle_rng(run_cfg.seed);

  StageResult result;
  for (int epoch = 0; epoch < run_cfg.epochs; ++epoch) {
    const double lr = cosine_lr(run_cfg.lr, run_cfg.min_lr, epoch, run_cfg.epochs);

    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    LossReport epoch_loss;
    for (size_t begin = 0; begin < order.size(); begin += run_cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + run_cfg.batch_size);
      std::vector<const Scene *> batch;
      batch.reserve(end - begin);
      for (size_t i = begin; i < end; ++i) {
        batch.push_back(&train[order[i]]);
      }
      add_report(epoch_loss, run_batch(model, batch, run_cfg));
      optimizer.step(model.params(), lr);
    }
    scale_report(epoch_loss, 1.0 / static_cast<double>(train.size()));

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_loss = epoch_loss;
    const bool last = (epoch == run_cfg.epochs - 1);
    if (!val.empty() && run_cfg.eval_every > 0 &&
        (epoch % run_cfg.eval_every == run_cfg.eval_every - 1 || last)) {
      log.val = evaluate_model(model, val);
      log.evaluated = true;
    }
    result.log.push_back(log);
  }

  result.checkpoint.stage = run_cfg.stage;
  result.checkpoint.config = cfg.to_json();
  result.checkpoint.params = model.params();
  return result;
}

void write_metrics_csv(const std::vector<EpochLog> & log, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << "epoch,lr,reg_aux,cls_aux,reg_base,cls_base,reg_refine,cls_refine,total,"
         "val_min_ade,val_min_fde,val_miss_rate,val_brier_min_fde\n";
  out.precision(10);
  for (const EpochLog & row : log) {
    out << row.epoch << ',' << row.lr << ',' << row.train_loss.reg_aux << ','
        << row.train_loss.cls_aux << ',' << row.train_loss.reg_base << ','
        << row.train_loss.cls_base << ',' << row.train_loss.reg_refine << ','
        << row.train_loss.cls_refine << ',' << row.train_loss.total << ',';
    if (row.evaluated) {
      out << row.val.min_ade << ',' << row.val.min_fde << ',' << row.val.miss_rate << ','
          << row.val.brier_min_fde;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace hypercast
