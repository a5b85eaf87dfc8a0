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

#ifndef HYPERCAST_SCENE_IO_HPP_
#define HYPERCAST_SCENE_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercast/scene.hpp"

namespace hypercast
{

/// Scene <-> JSON, lossless (doubles serialize with round-trip precision).
/// Unknown fields anywhere in the document are rejected (SchemaViolation).
nlohmann::json scene_to_json(const Scene & scene);
Scene scene_from_json(const nlohmann::json & j);

void save_scene(const Scene & scene, const std::string & path);  // IoError
Scene load_scene(const std::string & path);                      // IoError, SchemaViolation

/// Motion-forecasting CSV ingestion. Expects the columns TIMESTAMP,
/// TRACK_ID, OBJECT_TYPE, X, Y, CITY_NAME (extra columns are ignored).
/// Timestamps snap to a 10 Hz grid anchored at the file's earliest row
/// (nearest neighbor, +-0.05 s tolerance; rows outside tolerance drop).
/// The AGENT-typed track becomes the central agent and must cover the 50
/// consecutive grid steps from its first aligned sample: steps 0..19 become
/// the observation, 20..49 the ground truth. Insensitive to row order.
Scene load_argoverse_csv(const std::string & path);  // MalformedCsv, TooShort, IoError

struct DatasetEntry
{
  std::string path;   // relative to the manifest's directory
  std::string split;  // "train" | "val"
  std::string kind;
  uint64_t seed = 0;
};

struct Manifest
{
  std::vector<DatasetEntry> entries;
};

void save_manifest(const Manifest & manifest, const std::string & path);
Manifest load_manifest(const std::string & path);

/// Scene paths of one split, resolved against the manifest's directory.
std::vector<std::string> split_paths(
  const Manifest & manifest, const std::string & manifest_path, const std::string & split);

}  // namespace hypercast

#endif  // HYPERCAST_SCENE_IO_HPP_
