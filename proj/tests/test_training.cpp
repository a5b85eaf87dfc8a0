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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "hypercast/errors.hpp"
#include "hypercast/model.hpp"
#include "hypercast/scenario.hpp"
#include "hypercast/training.hpp"

namespace
{

hypercast::ModelConfig small_config()
{
  hypercast::ModelConfig cfg;
  cfg.hidden_dim = 16;
  cfg.num_modes = 3;
  cfg.t_obs = 20;
  cfg.horizon = 30;
  cfg.seed = 7;
  return cfg;
}

std::vector<hypercast::Scene> make_corpus(int count, uint64_t seed0)
{
  std::vector<hypercast::Scene> scenes;
  for (int i = 0; i < count; ++i) {
    hypercast::ScenarioSpec spec;
    spec.kind = hypercast::ScenarioKind::kLaneChange;
    spec.agent_count = 4;
    spec.seed = seed0 + static_cast<uint64_t>(i);
    scenes.push_back(hypercast::generate(spec));
  }
  return scenes;
}

hypercast::StageRunConfig quick_run(int stage, int epochs, uint64_t seed)
{
  hypercast::StageRunConfig run;
  run.stage = stage;
  run.epochs = epochs;
  run.batch_size = 2;
  run.seed = seed;
  return run;
}

std::string temp_path(const std::string & name)
{
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string read_all(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double rel_gap(double a, double b)
{
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("stage-1 training lowers the loss and follows the cosine schedule")
{
  const auto train = make_corpus(4, 100);
  const auto val = make_corpus(2, 900);
  auto run = quick_run(1, 6, 11);
  run.eval_every = 2;

  const hypercast::StageResult res =
    hypercast::run_stage(small_config(), run, train, val, nullptr);

  REQUIRE(res.log.size() == 6);
  CHECK(res.checkpoint.stage == 1);
  CHECK(res.log.back().train_loss.total < res.log.front().train_loss.total);

  for (const hypercast::EpochLog & row : res.log) {
    CHECK(row.train_loss.reg_base == 0.0);
    CHECK(row.train_loss.cls_base == 0.0);
    CHECK(row.train_loss.reg_refine == 0.0);
    CHECK(row.train_loss.cls_refine == 0.0);
    CHECK(
      row.train_loss.total ==
      doctest::Approx(row.train_loss.reg_aux + row.train_loss.cls_aux).epsilon(1e-12));
  }

  CHECK(res.log[0].lr == 5e-4);
  CHECK(res.log[5].lr == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(
    res.log[3].lr ==
    doctest::Approx(0.5 * 5e-4 * (1.0 + std::cos(M_PI * 3.0 / 5.0))).epsilon(1e-12));

  // eval_every = 2 evaluates epochs 1, 3, 5 (the last epoch always runs).
  const std::vector<bool> want{false, true, false, true, false, true};
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(res.log[i].evaluated == want[i]);
  }
  CHECK(res.log[5].val.count == 2);
  CHECK(res.log[5].val.min_ade > 0.0);
}

TEST_CASE("evaluation cadence: zero disables, empty validation set disables")
{
  const auto train = make_corpus(2, 300);
  const auto val = make_corpus(1, 901);

  auto run = quick_run(1, 3, 3);
  run.eval_every = 0;
  auto res = hypercast::run_stage(small_config(), run, train, val, nullptr);
  for (const auto & row : res.log) {
    CHECK_FALSE(row.evaluated);
  }

  run.eval_every = 1;
  res = hypercast::run_stage(small_config(), run, train, {}, nullptr);
  for (const auto & row : res.log) {
    CHECK_FALSE(row.evaluated);
  }
}

TEST_CASE("identical seed and config reproduce the checkpoint bitwise")
{
  const auto train = make_corpus(4, 200);
  const auto val = make_corpus(2, 902);
  const auto run = quick_run(1, 3, 21);

  const auto res1 = hypercast::run_stage(small_config(), run, train, val, nullptr);
  const auto res2 = hypercast::run_stage(small_config(), run, train, val, nullptr);

  REQUIRE(res1.log.size() == res2.log.size());
  for (size_t i = 0; i < res1.log.size(); ++i) {
    CHECK(res1.log[i].train_loss.total == res2.log[i].train_loss.total);
    CHECK(res1.log[i].val.min_fde == res2.log[i].val.min_fde);
  }

  const std::string p1 = temp_path("hypercast_train_a.ckpt");
  const std::string p2 = temp_path("hypercast_train_b.ckpt");
  hypercast::save_checkpoint(res1.checkpoint, p1);
  hypercast::save_checkpoint(res2.checkpoint, p2);
  const std::string b1 = read_all(p1);
  const std::string b2 = read_all(p2);
  CHECK(!b1.empty());
  CHECK(b1 == b2);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("worker count changes only the gradient summation order")
{
  const auto train = make_corpus(6, 400);
  hypercast::StageRunConfig run;
  run.stage = 1;
  run.epochs = 1;
  run.batch_size = 6;
  run.seed = 5;

  auto res1 = hypercast::run_stage(small_config(), run, train, {}, nullptr);
  run.jobs = 3;
  auto res3 = hypercast::run_stage(small_config(), run, train, {}, nullptr);

  CHECK(rel_gap(res1.log[0].train_loss.total, res3.log[0].train_loss.total) < 1e-6);

  const auto & v1 = res1.checkpoint.params.values();
  const auto & v3 = res3.checkpoint.params.values();
  REQUIRE(v1.size() == v3.size());
  for (const auto & [name, m1] : v1) {
    const Eigen::MatrixXd & m3 = v3.at(name);
    REQUIRE(m1.rows() == m3.rows());
    REQUIRE(m1.cols() == m3.cols());
    for (int r = 0; r < m1.rows(); ++r) {
      for (int c = 0; c < m1.cols(); ++c) {
        CHECK(rel_gap(m1(r, c), m3(r, c)) < 1e-6);
      }
    }
  }
}

TEST_CASE("stage ordering is enforced through checkpoints")
{
  const auto train = make_corpus(2, 500);
  const auto cfg = small_config();

  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(2, 1, 1), train, {}, nullptr),
    hypercast::CheckpointStageMismatch);
  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(3, 1, 1), train, {}, nullptr),
    hypercast::CheckpointStageMismatch);

  const auto s1 = hypercast::run_stage(cfg, quick_run(1, 1, 1), train, {}, nullptr);
  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(3, 1, 1), train, {}, &s1.checkpoint),
    hypercast::CheckpointStageMismatch);

  // Warm-starting stage 1 from a stage-1 checkpoint is allowed.
  CHECK_NOTHROW(hypercast::run_stage(cfg, quick_run(1, 1, 2), train, {}, &s1.checkpoint));

  const auto s2 = hypercast::run_stage(cfg, quick_run(2, 1, 1), train, {}, &s1.checkpoint);
  CHECK(s2.checkpoint.stage == 2);
  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(1, 1, 1), train, {}, &s2.checkpoint),
    hypercast::CheckpointStageMismatch);
  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(2, 1, 1), train, {}, &s2.checkpoint),
    hypercast::CheckpointStageMismatch);

  CHECK_THROWS_AS(
    hypercast::run_stage(cfg, quick_run(1, 1, 1), {}, {}, nullptr), hypercast::EmptyBatch);
}

TEST_CASE("stage transitions start where the previous stage stopped")
{
  const auto train = make_corpus(3, 600);
  const auto cfg = small_config();
  const auto s1 = hypercast::run_stage(cfg, quick_run(1, 2, 31), train, {}, nullptr);
  const hypercast::Scene probe = make_corpus(1, 700).front();

  // Before any stage-2 update the copied main decoder reproduces the
  // auxiliary one bitwise: the hyper-interactor injection starts at zero.
  hypercast::ModelConfig cfg2 = hypercast::ModelConfig::from_json(s1.checkpoint.config);
  cfg2.stage = 2;
  cfg2.seed = 32;
  hypercast::Model m2(cfg2, s1.checkpoint.params);
  m2.copy_aux_to_main();
  hypercast::ad::Graph g;
  const hypercast::ForwardOut fwd = m2.forward(g, probe);
  CHECK((g.value(fwd.base.mu_pos) - g.value(fwd.aux.mu_pos)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.value(fwd.base.b) - g.value(fwd.aux.b)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.value(fwd.base.pi) - g.value(fwd.aux.pi)).cwiseAbs().maxCoeff() == 0.0);

  // Zero-initialized refinement heads: the stage-3 model predicts the same
  // trajectories as the stage-2 checkpoint it extends (confidences are
  // renormalized, hence the tolerance).
  const auto s2 = hypercast::run_stage(cfg, quick_run(2, 2, 31), train, {}, &s1.checkpoint);
  hypercast::ModelConfig cfg3 = hypercast::ModelConfig::from_json(s2.checkpoint.config);
  cfg3.stage = 2;
  const hypercast::Model stage2(cfg3, s2.checkpoint.params);
  cfg3.stage = 3;
  cfg3.seed = 33;
  const hypercast::Model stage3(cfg3, s2.checkpoint.params);

  const auto pred2 = stage2.predict(probe);
  const auto pred3 = stage3.predict(probe);
  REQUIRE(pred2.size() == pred3.size());
  for (size_t a = 0; a < pred2.size(); ++a) {
    REQUIRE(pred2[a].modes.size() == pred3[a].modes.size());
    for (size_t k = 0; k < pred2[a].modes.size(); ++k) {
      CHECK(
        (pred2[a].modes[k].positions - pred3[a].modes[k].positions).cwiseAbs().maxCoeff() ==
        0.0);
      CHECK(
        std::abs(pred2[a].modes[k].confidence - pred3[a].modes[k].confidence) < 1e-12);
    }
  }
}

TEST_CASE("scene_backward composes the staged objective and fills gradients")
{
  const hypercast::Scene scene = make_corpus(1, 800).front();
  auto cfg = small_config();

  for (int stage : {1, 2, 3}) {
    cfg.stage = stage;
    hypercast::Model model(cfg);
    if (stage >= 2) {
      model.copy_aux_to_main();
    }
    hypercast::StageRunConfig run;
    run.stage = stage;
    hypercast::ad::Graph g;
    const hypercast::LossReport rep = hypercast::scene_backward(model, scene, run, g);

    double want = rep.reg_aux + rep.cls_aux;
    if (stage >= 2) {
      want += run.lambda1 * (rep.reg_base + rep.cls_base);
    }
    if (stage >= 3) {
      want += run.lambda2 * (rep.reg_refine + rep.cls_refine);
    }
    CHECK(rep.total == doctest::Approx(want).epsilon(1e-12));
    CHECK((stage >= 2) == (rep.reg_base != 0.0));
    CHECK((stage >= 3) == (rep.reg_refine != 0.0));

    model.params().accumulate_grads(g);
    double grad_norm = 0.0;
    for (const auto & [name, grad] : model.params().grads()) {
      CHECK(grad.allFinite());
      grad_norm += grad.squaredNorm();
    }
    CHECK(grad_norm > 0.0);
  }

  // The stage-3 weights are knobs, not constants.
  cfg.stage = 3;
  hypercast::Model model(cfg);
  model.copy_aux_to_main();
  hypercast::StageRunConfig run;
  run.stage = 3;
  run.lambda2 = 2.0;
  hypercast::ad::Graph g;
  const auto rep = hypercast::scene_backward(model, scene, run, g);
  CHECK(
    rep.total == doctest::Approx(
                   rep.reg_aux + rep.cls_aux + rep.reg_base + rep.cls_base +
                   2.0 * (rep.reg_refine + rep.cls_refine))
                   .epsilon(1e-12));
}

TEST_CASE("metrics CSV layout")
{
  std::vector<hypercast::EpochLog> log(2);
  log[0].epoch = 0;
  log[0].lr = 5e-4;
  log[0].train_loss = {1.5, 0.25, 0.0, 0.0, 0.0, 0.0, 1.75};
  log[1].epoch = 1;
  log[1].lr = 2.5e-4;
  log[1].train_loss = {1.0, 0.125, 0.0, 0.0, 0.0, 0.0, 1.125};
  log[1].evaluated = true;
  log[1].val.min_ade = 2.0;
  log[1].val.min_fde = 4.0;
  log[1].val.miss_rate = 0.5;
  log[1].val.brier_min_fde = 4.25;
  log[1].val.count = 2;

  const std::string path = temp_path("hypercast_metrics.csv");
  hypercast::write_metrics_csv(log, path);
  std::ifstream in(path);
  std::string header, row0, row1;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row0));
  REQUIRE(std::getline(in, row1));
  std::string extra;
  CHECK_FALSE(std::getline(in, extra));

  CHECK(
    header ==
    "epoch,lr,reg_aux,cls_aux,reg_base,cls_base,reg_refine,cls_refine,total,"
    "val_min_ade,val_min_fde,val_miss_rate,val_brier_min_fde");
  CHECK(std::count(header.begin(), header.end(), ',') == 12);
  CHECK(std::count(row0.begin(), row0.end(), ',') == 12);
  CHECK(row0.substr(row0.size() - 4) == ",,,,");
  CHECK(row0.substr(0, 2) == "0,");
  CHECK(row1.find("2,4,0.5,4.25") != std::string::npos);
  std::remove(path.c_str());

  CHECK_THROWS_AS(
    hypercast::write_metrics_csv(log, "/nonexistent-dir/metrics.csv"), hypercast::IoError);
}
