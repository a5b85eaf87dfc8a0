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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "hypercast/dataset.hpp"
#include "hypercast/errors.hpp"
#include "hypercast/rng.hpp"
#include "hypercast/scenario.hpp"
#include "hypercast/scene_io.hpp"

namespace
{

using hypercast::Scene;
using hypercast::Vec2;

std::string temp_path(const std::string & name)
{
  return (std::filesystem::temp_directory_path() / name).string();
}

bool scenes_identical(const Scene & a, const Scene & b)
{
  if (a.dt != b.dt || a.agents.size() != b.agents.size() || a.lanes.size() != b.lanes.size()) {
    return false;
  }
  for (size_t i = 0; i < a.agents.size(); ++i) {
    if (a.agents[i].id != b.agents[i].id) return false;
    if (a.agents[i].positions != b.agents[i].positions) return false;
    if (a.agents[i].mask != b.agents[i].mask) return false;
    if (a.agents[i].attributes != b.agents[i].attributes) return false;
  }
  for (size_t i = 0; i < a.lanes.size(); ++i) {
    if (a.lanes[i].start != b.lanes[i].start || a.lanes[i].end != b.lanes[i].end) return false;
    if (a.lanes[i].attributes != b.lanes[i].attributes) return false;
  }
  return a.ground_truth == b.ground_truth;
}

/// Rows covering 50 aligned steps for one track.
struct CsvRow
{
  double timestamp;
  std::string track_id;
  std::string object_type;
  double x;
  double y;
};

std::string render_csv(const std::vector<CsvRow> & rows)
{
  std::string out = "TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y,CITY_NAME\n";
  char buf[160];
  for (const CsvRow & r : rows) {
    std::snprintf(
      buf, sizeof buf, "%.4f,%s,%s,%.4f,%.4f,PIT\n", r.timestamp, r.track_id.c_str(),
      r.object_type.c_str(), r.x, r.y);
    out += buf;
  }
  return out;
}

std::vector<CsvRow> sample_rows()
{
  std::vector<CsvRow> rows;
  const double t0 = 315967320.0;
  for (int t = 0; t < 50; ++t) {
    rows.push_back({t0 + 0.1 * t, "agent-1", "AGENT", 2000.0 + 1.1 * t, 800.0 + 0.2 * t});
  }
  // A neighbor with a gap in the observed window and no complete future.
  for (int t = 0; t < 32; ++t) {
    if (t == 7 || t == 8) {
      continue;
    }
    rows.push_back({t0 + 0.1 * t, "car-2", "OTHERS", 2010.0 - 0.8 * t, 795.0 + 0.1 * t});
  }
  // The mapping AV, fully observed.
  for (int t = 0; t < 50; ++t) {
    rows.push_back({t0 + 0.1 * t, "av-3", "AV", 1990.0 + 0.9 * t, 805.0 - 0.1 * t});
  }
  return rows;
}

std::string write_csv(const std::string & name, const std::vector<CsvRow> & rows)
{
  const std::string path = temp_path(name);
  std::ofstream out(path);
  out << render_csv(rows);
  return path;
}

}  // namespace

TEST_CASE("scene json round-trip is identity")
{
  hypercast::ScenarioSpec spec;
  spec.kind = hypercast::ScenarioKind::kIntersection;
  spec.agent_count = 6;
  spec.seed = 77;
  const Scene scene = hypercast::generate(spec);

  const std::string path = temp_path("hypercast_scene_rt.json");
  hypercast::save_scene(scene, path);
  const Scene back = hypercast::load_scene(path);
  CHECK(scenes_identical(scene, back));

  // Round-trip again: serialization is stable.
  const std::string path2 = temp_path("hypercast_scene_rt2.json");
  hypercast::save_scene(back, path2);
  std::ifstream f1(path);
  std::ifstream f2(path2);
  const std::string s1(
    (std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2(
    (std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("scene json rejects unknown or missing fields")
{
  hypercast::ScenarioSpec spec;
  spec.seed = 5;
  const Scene scene = hypercast::generate(spec);
  nlohmann::json j = hypercast::scene_to_json(scene);

  nlohmann::json extra = j;
  extra["surprise"] = 1;
  CHECK_THROWS_AS(hypercast::scene_from_json(extra), hypercast::SchemaViolation);

  nlohmann::json extra_agent = j;
  extra_agent["agents"][0]["color"] = "red";
  CHECK_THROWS_AS(hypercast::scene_from_json(extra_agent), hypercast::SchemaViolation);

  nlohmann::json missing = j;
  missing.erase("dt");
  CHECK_THROWS_AS(hypercast::scene_from_json(missing), hypercast::SchemaViolation);

  nlohmann::json bad_format = j;
  bad_format["format"] = "something-else";
  CHECK_THROWS_AS(hypercast::scene_from_json(bad_format), hypercast::SchemaViolation);
}

TEST_CASE("csv loader builds a 20+30 scene from trajectory rows")
{
  const std::string path = write_csv("hypercast_io_basic.csv", sample_rows());
  const Scene scene = hypercast::load_argoverse_csv(path);
  std::remove(path.c_str());

  CHECK(scene.dt == doctest::Approx(0.1));
  REQUIRE(scene.agents.size() == 3);
  CHECK(scene.agents.front().id == "agent-1");  // central first
  CHECK(scene.t_obs() == 20);
  // Central covers the full future.
  REQUIRE(scene.gt_for("agent-1") != nullptr);
  CHECK(scene.gt_for("agent-1")->size() == 30);
  // The gapped neighbor has a padded mask and no ground truth.
  const int nbr = scene.agent_index("car-2");
  REQUIRE(nbr >= 0);
  CHECK_FALSE(scene.agents[nbr].mask[7]);
  CHECK_FALSE(scene.agents[nbr].mask[8]);
  CHECK(scene.gt_for("car-2") == nullptr);
  // Observed positions are snapped to the grid.
  const Vec2 p = scene.agents.front().positions[3];
  CHECK(hypercast::snap_to_grid(p.x()) == p.x());
  CHECK_NOTHROW(scene.validate());
}

TEST_CASE("csv loader is insensitive to row order")
{
  std::vector<CsvRow> rows = sample_rows();
  const std::string path_a = write_csv("hypercast_io_sorted.csv", rows);

  hypercast::Rng rng(123);
  std::vector<size_t> order(rows.size());
  for (size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  rng.shuffle(order);
  std::vector<CsvRow> shuffled;
  for (size_t idx : order) {
    shuffled.push_back(rows[idx]);
  }
  const std::string path_b = write_csv("hypercast_io_shuffled.csv", shuffled);

  const Scene a = hypercast::load_argoverse_csv(path_a);
  const Scene b = hypercast::load_argoverse_csv(path_b);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
  CHECK(scenes_identical(a, b));
}

TEST_CASE("csv loader rejects structural problems")
{
  // Missing required column.
  const std::string no_y = temp_path("hypercast_io_noy.csv");
  std::ofstream(no_y) << "TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,CITY_NAME\n"
                         "1.0,a,AGENT,1.0,PIT\n";
  CHECK_THROWS_AS(hypercast::load_argoverse_csv(no_y), hypercast::MalformedCsv);
  std::remove(no_y.c_str());

  // No AGENT track at all.
  std::vector<CsvRow> rows;
  for (int t = 0; t < 50; ++t) {
    rows.push_back({0.1 * t, "x", "OTHERS", 1.0 * t, 0.0});
  }
  const std::string no_agent = write_csv("hypercast_io_noagent.csv", rows);
  CHECK_THROWS_AS(hypercast::load_argoverse_csv(no_agent), hypercast::MalformedCsv);
  std::remove(no_agent.c_str());

  // Central track shorter than 50 aligned steps.
  std::vector<CsvRow> short_rows;
  for (int t = 0; t < 49; ++t) {
    short_rows.push_back({0.1 * t, "a", "AGENT", 1.0 * t, 0.0});
  }
  const std::string too_short = write_csv("hypercast_io_short.csv", short_rows);
  CHECK_THROWS_AS(hypercast::load_argoverse_csv(too_short), hypercast::TooShort);
  std::remove(too_short.c_str());

  // Unparseable numeric field.
  const std::string bad_num = temp_path("hypercast_io_badnum.csv");
  std::ofstream(bad_num) << "TIMESTAMP,TRACK_ID,OBJECT_TYPE,X,Y,CITY_NAME\n"
                            "abc,a,AGENT,1.0,2.0,PIT\n";
  CHECK_THROWS_AS(hypercast::load_argoverse_csv(bad_num), hypercast::MalformedCsv);
  std::remove(bad_num.c_str());

  CHECK_THROWS_AS(
    hypercast::load_argoverse_csv(temp_path("hypercast_io_missing_file.csv")),
    hypercast::IoError);
}

TEST_CASE("csv timestamps snap to the 0.1 s grid only within tolerance")
{
  std::vector<CsvRow> rows = sample_rows();
  // A stray sample 0.07 s off the grid must be dropped, not mis-binned.
  rows.push_back({315967320.0 + 0.1 * 25 + 0.07, "car-2", "OTHERS", 1.0, 1.0});
  const std::string path = write_csv("hypercast_io_offgrid.csv", rows);
  const Scene scene = hypercast::load_argoverse_csv(path);
  std::remove(path.c_str());
  const int nbr = scene.agent_index("car-2");
  REQUIRE(nbr >= 0);
  // Step 25 lies beyond t_obs, and car-2's future stays incomplete.
  CHECK(scene.gt_for("car-2") == nullptr);
}

TEST_CASE("dataset generation writes a loadable manifest with both splits")
{
  const std::string dir = temp_path("hypercast_io_dataset");
  std::filesystem::remove_all(dir);
  hypercast::DatasetOptions options;
  options.count = 20;
  options.seed = 9;
  const hypercast::Manifest manifest = hypercast::generate_dataset(dir, options);
  REQUIRE(manifest.entries.size() == 20);

  const std::string manifest_path = (std::filesystem::path(dir) / "manifest.json").string();
  const hypercast::Manifest loaded = hypercast::load_manifest(manifest_path);
  REQUIRE(loaded.entries.size() == 20);
  int train = 0;
  int val = 0;
  for (const auto & e : loaded.entries) {
    if (e.split == "train") {
      ++train;
    } else if (e.split == "val") {
      ++val;
    }
  }
  CHECK(train == 16);
  CHECK(val == 4);

  const std::vector<Scene> val_scenes = hypercast::load_split(loaded, manifest_path, "val");
  REQUIRE(val_scenes.size() == 4);
  for (const Scene & s : val_scenes) {
    CHECK_NOTHROW(s.validate());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest rejects unknown splits and keys")
{
  nlohmann::json j{
    {"format", "hypercast-manifest"},
    {"version", 1},
    {"scenes",
     nlohmann::json::array(
       {{{"path", "a.json"}, {"split", "test"}, {"kind", "straight"}, {"seed", 1}}})},
  };
  const std::string path = temp_path("hypercast_io_manifest.json");
  const auto dump = [&](const nlohmann::json & doc) { std::ofstream(path) << doc.dump(); };

  dump(j);
  CHECK_THROWS_AS(hypercast::load_manifest(path), hypercast::SchemaViolation);
  j["scenes"][0]["split"] = "train";
  dump(j);
  CHECK_NOTHROW(hypercast::load_manifest(path));
  j["scenes"][0]["owner"] = "me";
  dump(j);
  CHECK_THROWS_AS(hypercast::load_manifest(path), hypercast::SchemaViolation);
  std::remove(path.c_str());
}
