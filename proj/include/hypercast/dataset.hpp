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

#ifndef HYPERCAST_DATASET_HPP_
#define HYPERCAST_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hypercast/scenario.hpp"
#include "hypercast/scene_io.hpp"

namespace hypercast
{

struct DatasetOptions
{
  int count = 500;
  uint64_t seed = 1;
  double train_fraction = 0.8;
  double noise_std = 0.05;
  double dt = 0.1;
  int t_obs = 20;
  int horizon = 30;
};

/// Writes `count` scenes plus manifest.json into `dir`, cycling the four
/// prediction scenario kinds with their natural agent counts. Deterministic
/// per seed; splits interleave so every kind appears in both.
Manifest generate_dataset(const std::string & dir, const DatasetOptions & options);

/// Loads every scene of one split, in manifest order.
std::vector<Scene> load_split(const Manifest & manifest, const std::string & manifest_path,
                              const std::string & split);

}  // namespace hypercast

#endif  // HYPERCAST_DATASET_HPP_
