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

#ifndef HYPERCAST_TRAINING_HPP_
#define HYPERCAST_TRAINING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hypercast/losses.hpp"
#include "hypercast/metrics.hpp"
#include "hypercast/model.hpp"
#include "hypercast/params.hpp"

namespace hypercast
{

struct StageRunConfig
{
  int stage = 1;
  double lambda1 = 1.0;
  double lambda2 = 5.0;
  double lr = 5e-4;
  double min_lr = 0.0;
  int batch_size = 32;
  int epochs = 64;
  uint64_t seed = 1;
  double weight_decay = 1e-4;
  int jobs = 1;
  bool soft_labels = false;
  int eval_every = 1;  // 0 disables per-epoch evaluation

  void validate() const;  // ConfigError
};

struct EpochLog
{
  int epoch = 0;
  double lr = 0.0;
  LossReport train_loss;  // averaged over scenes
  bool evaluated = false;
  MetricValues val;
};

struct StageResult
{
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// One scene's loss on a fresh tape, gradients accumulated into the graph.
/// Shared by training and the gradient tests.
LossReport scene_backward(
  const Model & model, const Scene & scene, const StageRunConfig & cfg, ad::Graph & g);

/// Trains one stage. Stage n > 1 requires a stage n-1 checkpoint (the
/// stage-2 transition copies the auxiliary decoder into the fresh main
/// decoder); stage 1 accepts none or a stage-1 checkpoint to warm-start.
/// Deterministic given (configs, data, seed); `jobs` > 1 changes only the
/// gradient summation order (documented tolerance 1e-6 relative).
StageResult run_stage(
  const ModelConfig & model_cfg, const StageRunConfig & run_cfg,
  const std::vector<Scene> & train, const std::vector<Scene> & val,
  const Checkpoint * previous);

/// Batch-mean metrics of the central agents of `scenes`.
MetricValues evaluate_model(const Model & model, const std::vector<Scene> & scenes);

void write_metrics_csv(const std::vector<EpochLog> & log, const std::string & path);

}  // namespace hypercast

#endif  // HYPERCAST_TRAINING_HPP_
