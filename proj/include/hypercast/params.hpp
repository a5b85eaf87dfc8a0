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

#ifndef HYPERCAST_PARAMS_HPP_
#define HYPERCAST_PARAMS_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "hypercast/autodiff.hpp"
#include "hypercast/rng.hpp"

namespace hypercast
{

/// Named parameter arrays plus their gradient accumulators. std::map keeps
/// iteration order fixed by name, which the optimizer relies on for
/// deterministic updates.
class ParamStore
{
public:
  Eigen::MatrixXd & add(const std::string & name, Eigen::MatrixXd value);
  bool has(const std::string & name) const { return values_.count(name) > 0; }
  const Eigen::MatrixXd & at(const std::string & name) const;
  Eigen::MatrixXd & mutable_at(const std::string & name);

  /// Registers the named parameter on a tape (reusing the node if the tape
  /// already holds it).
  ad::Ref use(ad::Graph & g, const std::string & name) const;

  /// Adds the tape's parameter gradients into this store's accumulators.
  void accumulate_grads(const ad::Graph & g);
  void zero_grads();
  const std::map<std::string, Eigen::MatrixXd> & grads() const { return grads_; }
  std::map<std::string, Eigen::MatrixXd> & mutable_grads() { return grads_; }

  const std::map<std::string, Eigen::MatrixXd> & values() const { return values_; }
  std::map<std::string, Eigen::MatrixXd> & mutable_values() { return values_; }

  size_t count() const { return values_.size(); }
  size_t scalar_count() const;
  bool all_finite() const;

private:
  std::map<std::string, Eigen::MatrixXd> values_;
  std::map<std::string, Eigen::MatrixXd> grads_;
};

/// Kaiming-style fan-in uniform draw: entries ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
Eigen::MatrixXd kaiming_uniform(Rng & rng, int rows, int cols, int fan_in);

/// Checkpoint container: parameter arrays, the training stage that produced
/// them, and the model configuration they were built for.
struct Checkpoint
{
  int stage = 0;
  nlohmann::json config;
  ParamStore params;
};

/// Checkpoint files are MessagePack-encoded JSON (format_version 1):
///   {format_version, stage, config, params: {name: {rows, cols, data}}}
/// where data is the row-major array of little-endian doubles as a binary
/// blob. Same store contents always serialize to identical bytes.
void save_checkpoint(const Checkpoint & ckpt, const std::string & path);
Checkpoint load_checkpoint(const std::string & path);

}  // namespace hypercast

#endif  // HYPERCAST_PARAMS_HPP_
