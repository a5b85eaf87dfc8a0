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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hypercast/dataset.hpp"
#include "hypercast/errors.hpp"
#include "hypercast/losses.hpp"
#include "hypercast/metrics.hpp"
#include "hypercast/model.hpp"
#include "hypercast/params.hpp"
#include "hypercast/planner.hpp"
#include "hypercast/scenario.hpp"
#include "hypercast/scene_io.hpp"
#include "hypercast/svg.hpp"
#include "hypercast/training.hpp"

namespace
{

using hypercast::ConfigError;

/// Command-line overrides land on top of the config file.
struct CliOverrides
{
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> stage;
};

nlohmann::json load_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  return j;
}

void check_keys(const nlohmann::json & j, const std::set<std::string> & allowed)
{
  for (const auto & [key, value] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

template <typename T>
T get_or(const nlohmann::json & j, const std::string & key, T fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::string require_string(const nlohmann::json & j, const std::string & key)
{
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError("config key '" + key + "' (string) is required");
  }
  return j.at(key).get<std::string>();
}

hypercast::ModelConfig model_config_from(const nlohmann::json & j)
{
  if (!j.contains("model")) {
    return hypercast::ModelConfig{};
  }
  // ModelConfig::from_json rejects unknown keys and fills defaults.
  return hypercast::ModelConfig::from_json(j.at("model"));
}

hypercast::Scene load_scene_any(const std::string & path)
{
  if (std::filesystem::path(path).extension() == ".csv") {
    return hypercast::load_argoverse_csv(path);
  }
  return hypercast::load_scene(path);
}

void write_json(const nlohmann::json & j, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw hypercast::IoError("cannot open for writing: " + path);
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw hypercast::IoError("write failed: " + path);
  }
}

int cmd_generate(const nlohmann::json & cfg, const CliOverrides & cli)
{
  check_keys(
    cfg, {"out_dir", "count", "seed", "train_fraction", "noise_std", "dt", "t_obs", "horizon"});
  hypercast::DatasetOptions options;
  options.count = get_or(cfg, "count", options.count);
  options.seed = get_or(cfg, "seed", options.seed);
  options.train_fraction = get_or(cfg, "train_fraction", options.train_fraction);
  options.noise_std = get_or(cfg, "noise_std", options.noise_std);
  options.dt = get_or(cfg, "dt", options.dt);
  options.t_obs = get_or(cfg, "t_obs", options.t_obs);
  options.horizon = get_or(cfg, "horizon", options.horizon);
  if (cli.seed) {
    options.seed = *cli.seed;
  }
  const std::string out_dir = require_string(cfg, "out_dir");

  const hypercast::Manifest manifest = hypercast::generate_dataset(out_dir, options);
  int train = 0;
  for (const hypercast::DatasetEntry & e : manifest.entries) {
    train += e.split == "train" ? 1 : 0;
  }
  std::cout << "wrote " << manifest.entries.size() << " scenes (" << train << " train, "
            << manifest.entries.size() - train << " val) to " << out_dir << "\n";
  return 0;
}

int cmd_train(const nlohmann::json & cfg, const CliOverrides & cli)
{
  check_keys(cfg, {"manifest",   "checkpoint_in", "checkpoint_out", "metrics_csv", "model",
                   "stage",      "lambda1",       "lambda2",        "lr",          "min_lr",
                   "batch_size", "epochs",        "seed",           "weight_decay", "jobs",
                   "soft_labels", "eval_every"});
  hypercast::StageRunConfig run;
  run.stage = get_or(cfg, "stage", run.stage);
  run.lambda1 = get_or(cfg, "lambda1", run.lambda1);
  run.lambda2 = get_or(cfg, "lambda2", run.lambda2);
  run.lr = get_or(cfg, "lr", run.lr);
  run.min_lr = get_or(cfg, "min_lr", run.min_lr);
  run.batch_size = get_or(cfg, "batch_size", run.batch_size);
  run.epochs = get_or(cfg, "epochs", run.epochs);
  run.seed = get_or(cfg, "seed", run.seed);
  run.weight_decay = get_or(cfg, "weight_decay", run.weight_decay);
  run.jobs = get_or(cfg, "jobs", run.jobs);
  run.soft_labels = get_or(cfg, "soft_labels", run.soft_labels);
  run.eval_every = get_or(cfg, "eval_every", run.eval_every);
  if (cli.seed) {
    run.seed = *cli.seed;
  }
  if (cli.jobs) {
    run.jobs = *cli.jobs;
  }
  if (cli.stage) {
    run.stage = *cli.stage;
  }
  run.validate();

  const std::string manifest_path = require_string(cfg, "manifest");
  const std::string checkpoint_out = require_string(cfg, "checkpoint_out");

  const hypercast::Manifest manifest = hypercast::load_manifest(manifest_path);
  const std::vector<hypercast::Scene> train =
    hypercast::load_split(manifest, manifest_path, "train");
  const std::vector<hypercast::Scene> val = hypercast::load_split(manifest, manifest_path, "val");

  std::optional<hypercast::Checkpoint> previous;
  if (cfg.contains("checkpoint_in") && !cfg.at("checkpoint_in").get<std::string>().empty()) {
    previous = hypercast::load_checkpoint(cfg.at("checkpoint_in").get<std::string>());
  }

  const hypercast::ModelConfig model_cfg = model_config_from(cfg);
  const hypercast::StageResult result = hypercast::run_stage(
    model_cfg, run, train, val, previous ? &*previous : nullptr);

  hypercast::save_checkpoint(result.checkpoint, checkpoint_out);
  if (cfg.contains("metrics_csv")) {
    hypercast::write_metrics_csv(result.log, cfg.at("metrics_csv").get<std::string>());
  }

  const hypercast::EpochLog & last = result.log.back();
  std::cout << "stage " << run.stage << " done: total loss " << last.train_loss.total;
  if (last.evaluated) {
    std::cout << ", val minFDE " << last.val.min_fde;
  }
  std::cout << ", checkpoint " << checkpoint_out << "\n";
  return 0;
}

int cmd_evaluate(const nlohmann::json & cfg, const CliOverrides & cli)
{
  (void)cli;
  check_keys(cfg, {"manifest", "split", "checkpoint", "report_json", "plots_dir", "plot_count"});
  const std::string manifest_path = require_string(cfg, "manifest");
  const std::string checkpoint_path = require_string(cfg, "checkpoint");
  const std::string split = get_or<std::string>(cfg, "split", "val");

  const hypercast::Checkpoint ckpt = hypercast::load_checkpoint(checkpoint_path);
  const hypercast::Model model(
    hypercast::ModelConfig::from_json(ckpt.config), ckpt.params);
  const hypercast::Manifest manifest = hypercast::load_manifest(manifest_path);
  const std::vector<hypercast::Scene> scenes =
    hypercast::load_split(manifest, manifest_path, split);

  std::vector<hypercast::SceneEval> evals;
  evals.reserve(scenes.size());
  std::vector<std::vector<hypercast::AgentPrediction>> all_preds;
  all_preds.reserve(scenes.size());
  for (const hypercast::Scene & scene : scenes) {
    all_preds.push_back(model.predict(scene));
    evals.push_back(hypercast::evaluate_scene(all_preds.back(), scene));
  }
  const hypercast::MetricReport report = hypercast::aggregate(evals);

  if (cfg.contains("report_json")) {
    write_json(hypercast::report_to_json(report), cfg.at("report_json").get<std::string>());
  }
  if (cfg.contains("plots_dir")) {
    const std::string dir = cfg.at("plots_dir").get<std::string>();
    std::filesystem::create_directories(dir);
    const int plot_count =
      std::min<int>(get_or(cfg, "plot_count", 4), static_cast<int>(scenes.size()));
    for (int i = 0; i < plot_count; ++i) {
      hypercast::plot_scene_predictions(
        scenes[i], all_preds[i],
        (std::filesystem::path(dir) / ("scene_" + std::to_string(i) + ".svg")).string());
    }
    hypercast::plot_bucket_bars(
      report, (std::filesystem::path(dir) / "buckets.svg").string());
  }

  std::cout << "evaluated " << scenes.size() << " scenes: minADE " << report.overall.min_ade
            << ", minFDE " << report.overall.min_fde << ", MR " << report.overall.miss_rate
            << ", brier-minFDE " << report.overall.brier_min_fde << "\n";
  return 0;
}

int cmd_predict(const nlohmann::json & cfg, const CliOverrides & cli)
{
  (void)cli;
  check_keys(cfg, {"checkpoint", "scene", "output"});
  const hypercast::Checkpoint ckpt =
    hypercast::load_checkpoint(require_string(cfg, "checkpoint"));
  const hypercast::Model model(
    hypercast::ModelConfig::from_json(ckpt.config), ckpt.params);
  const hypercast::Scene scene = load_scene_any(require_string(cfg, "scene"));
  const std::vector<hypercast::AgentPrediction> preds = model.predict(scene);
  write_json(hypercast::predictions_to_json(preds), require_string(cfg, "output"));
  std::cout << "predicted " << preds.size() << " agents\n";
  return 0;
}

double min_neighbor_distance(
  const Eigen::MatrixXd & traj, const std::vector<Eigen::MatrixXd> & neighbors)
{
  double best = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd & nbr : neighbors) {
    for (Eigen::Index t = 0; t < traj.rows(); ++t) {
      best = std::min(best, (traj.row(t) - nbr.row(t)).norm());
    }
  }
  return best;
}

int cmd_plan(const nlohmann::json & cfg, const CliOverrides & cli)
{
  (void)cli;
  check_keys(cfg, {"checkpoint", "scene", "output", "plot", "comfort", "lane", "safety"});
  const hypercast::Checkpoint ckpt =
    hypercast::load_checkpoint(require_string(cfg, "checkpoint"));
  const hypercast::Model model(
    hypercast::ModelConfig::from_json(ckpt.config), ckpt.params);
  const hypercast::Scene scene = load_scene_any(require_string(cfg, "scene"));
  const std::vector<hypercast::AgentPrediction> preds = model.predict(scene);

  // The ego is the scene's central agent; its top-confidence mode is both
  // the initial plan and the lane reference; neighbors contribute their own
  // top-confidence modes.
  hypercast::PlannerProblem problem;
  problem.dt = scene.dt;
  problem.weights.comfort = get_or(cfg, "comfort", problem.weights.comfort);
  problem.weights.lane = get_or(cfg, "lane", problem.weights.lane);
  problem.weights.safety = get_or(cfg, "safety", problem.weights.safety);

  const hypercast::AgentTrack & ego_track = scene.agents.front();
  const hypercast::AgentPrediction * ego_pred = nullptr;
  for (const hypercast::AgentPrediction & p : preds) {
    if (p.agent_id == ego_track.id) {
      ego_pred = &p;
    }
  }
  if (ego_pred == nullptr) {
    throw hypercast::EmptyPrediction("plan: no ego prediction");
  }
  const Eigen::MatrixXd ego_traj = ego_pred->modes[ego_pred->top_mode()].positions;

  problem.ego0.position = ego_track.positions.back();
  const hypercast::ReferenceFrame frame = hypercast::build_reference_frame(ego_track);
  problem.ego0.heading = frame.theta;
  int last_valid = -1;
  for (int t = static_cast<int>(ego_track.mask.size()) - 1; t > 0; --t) {
    if (ego_track.mask[t] && ego_track.mask[t - 1]) {
      last_valid = t;
      break;
    }
  }
  problem.ego0.speed =
    last_valid > 0
      ? (ego_track.positions[last_valid] - ego_track.positions[last_valid - 1]).norm() / scene.dt
      : 0.0;

  problem.u0 = hypercast::trajectory_to_controls(ego_traj, problem.ego0, scene.dt);
  problem.lane_ref.push_back(problem.ego0.position);
  for (Eigen::Index t = 0; t < ego_traj.rows(); ++t) {
    problem.lane_ref.emplace_back(ego_traj(t, 0), ego_traj(t, 1));
  }
  for (const hypercast::AgentPrediction & p : preds) {
    if (p.agent_id == ego_track.id) {
      continue;
    }
    problem.neighbors.push_back(p.modes[p.top_mode()].positions);
  }

  const Eigen::MatrixXd before = hypercast::rollout(problem.u0, problem.ego0, problem.dt);
  const hypercast::PlanResult result = hypercast::optimize(problem);

  nlohmann::json controls = nlohmann::json::array();
  for (const hypercast::Control & u : result.controls) {
    controls.push_back({u.accel, u.steer});
  }
  const auto matrix_json = [](const Eigen::MatrixXd & m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
      rows.push_back({m(t, 0), m(t, 1)});
    }
    return rows;
  };
  nlohmann::json iterates = nlohmann::json::array();
  for (const hypercast::PlanIterate & it : result.iterates) {
    iterates.push_back({{"cost", it.cost}, {"damping", it.damping}});
  }
  const nlohmann::json out{
    {"controls", controls},
    {"before", matrix_json(before)},
    {"after", matrix_json(result.trajectory)},
    {"iterates", iterates},
    {"min_distance_before", min_neighbor_distance(before, problem.neighbors)},
    {"min_distance_after", min_neighbor_distance(result.trajectory, problem.neighbors)},
  };
  write_json(out, require_string(cfg, "output"));
  if (cfg.contains("plot")) {
    hypercast::plot_plan_comparison(
      problem, before, result.trajectory, cfg.at("plot").get<std::string>());
  }
  std::cout << "plan: cost " << result.iterates.front().cost << " -> "
            << result.iterates.back().cost << ", min distance "
            << out["min_distance_before"].get<double>() << " -> "
            << out["min_distance_after"].get<double>() << "\n";
  return 0;
}

int cmd_plot(const nlohmann::json & cfg, const CliOverrides & cli)
{
  (void)cli;
  check_keys(cfg, {"scene", "checkpoint", "output"});
  const hypercast::Scene scene = load_scene_any(require_string(cfg, "scene"));
  std::vector<hypercast::AgentPrediction> preds;
  if (cfg.contains("checkpoint")) {
    const hypercast::Checkpoint ckpt =
      hypercast::load_checkpoint(cfg.at("checkpoint").get<std::string>());
    const hypercast::Model model(
      hypercast::ModelConfig::from_json(ckpt.config), ckpt.params);
    preds = model.predict(scene);
  }
  hypercast::plot_scene_predictions(scene, preds, require_string(cfg, "output"));
  std::cout << "plot written\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"hypercast: coarse-to-fine multimodal trajectory prediction"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides cli;
  uint64_t seed_arg = 0;
  int jobs_arg = 0;
  int stage_arg = 0;

  const auto add_common = [&](CLI::App * sub, bool needs_config) {
    CLI::Option * copt = sub->add_option("--config", config_path, "JSON config file")
                           ->envname("HYPERCAST_CONFIG");
    if (needs_config) {
      copt->required();
    }
    // each() fires before CLI11 writes the bound variable, so parse the
    // value string itself.
    sub->add_option("--seed", seed_arg, "override the config seed")
      ->envname("HYPERCAST_SEED")
      ->each([&](const std::string & s) { cli.seed = std::stoull(s); });
    sub->add_option("--jobs", jobs_arg, "worker threads for training")
      ->envname("HYPERCAST_JOBS")
      ->each([&](const std::string & s) { cli.jobs = std::stoi(s); });
    sub->add_option("--stage", stage_arg, "override the training stage")
      ->envname("HYPERCAST_STAGE")
      ->each([&](const std::string & s) { cli.stage = std::stoi(s); });
  };

  CLI::App * generate = app.add_subcommand("generate", "write a synthetic scene dataset");
  CLI::App * train = app.add_subcommand("train", "train one stage");
  CLI::App * evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on a split");
  CLI::App * predict = app.add_subcommand("predict", "predict one scene");
  CLI::App * plan = app.add_subcommand("plan", "plan the ego trajectory in one scene");
  CLI::App * plot = app.add_subcommand("plot", "render a scene overlay");
  for (CLI::App * sub : {generate, train, evaluate, predict, plan, plot}) {
    add_common(sub, true);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const nlohmann::json cfg = load_config(config_path);
    if (generate->parsed()) {
      return cmd_generate(cfg, cli);
    }
    if (train->parsed()) {
      return cmd_train(cfg, cli);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(cfg, cli);
    }
    if (predict->parsed()) {
      return cmd_predict(cfg, cli);
    }
    if (plan->parsed()) {
      return cmd_plan(cfg, cli);
    }
    if (plot->parsed()) {
      return cmd_plot(cfg, cli);
    }
    return 1;
  } catch (const ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const hypercast::InvalidSpec & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
