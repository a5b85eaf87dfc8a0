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

#include "hypercast/dataset.hpp"

#include <array>
#include <cstdio>
#include <filesystem>

#include "hypercast/errors.hpp"
#include "hypercast/rng.hpp"

namespace hypercast
{

Manifest generate_dataset(const std::string & dir, const DatasetOptions & options)
{
  if (options.count < 0 || options.train_fraction < 0.0 || options.train_fraction > 1.0) {
    throw InvalidSpec("dataset: count >= 0 and train_fraction in [0, 1] required");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create " + dir + ": " + ec.message());
  }

  struct KindRecipe
  {
    ScenarioKind kind;
    int agent_count;
  };
  constexpr std::array<KindRecipe, 4> kCycle{{
    {ScenarioKind::kStraight, 3},
    {ScenarioKind::kLaneChange, 4},
    {ScenarioKind::kMerge, 4},
    {ScenarioKind::kIntersection, 6},
  }};

  Rng seeder(options.seed);
  // The cycle length is coprime with the split period, so both splits see
  // every kind.
  const int period = std::max(2, static_cast<int>(std::lround(1.0 / std::max(
                                    1e-9, 1.0 - options.train_fraction))));

  Manifest manifest;
  for (int i = 0; i < options.count; ++i) {
    const KindRecipe & recipe = kCycle[i % kCycle.size()];
    ScenarioSpec spec;
    spec.kind = recipe.kind;
    spec.agent_count = recipe.agent_count;
    spec.seed = seeder.next_u64();
    spec.noise_std = options.noise_std;
    spec.dt = options.dt;
    spec.t_obs = options.t_obs;
    spec.horizon = options.horizon;

    const Scene scene = generate(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05d.json", i);
    save_scene(scene, (std::filesystem::path(dir) / name).string());

    DatasetEntry entry;
    entry.path = name;
    entry.split = (i % period == period - 1) ? "val" : "train";
    entry.kind = to_string(spec.kind);
    entry.seed = spec.seed;
    manifest.entries.push_back(std::move(entry));
  }

  save_manifest(manifest, (std::filesystem::path(dir) / "manifest.json").string());
  return manifest;
}

std::vector<Scene> load_split(
  const Manifest & manifest, const std::string & manifest_path, const std::string & split)
{
  std::vector<Scene> scenes;
  for (const std::string & path : split_paths(manifest, manifest_path, split)) {
    scenes.push_back(load_scene(path));
  }
  return scenes;
}

}  // namespace hypercast
