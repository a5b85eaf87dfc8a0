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

#include "hypercast/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "hypercast/errors.hpp"
#include "hypercast/geometry.hpp"

namespace hypercast
{

namespace
{

void reject_unknown_keys(
  const nlohmann::json & j, const std::set<std::string> & allowed, const std::string & where)
{
  if (!j.is_object()) {
    throw SchemaViolation(where + ": expected an object");
  }
  for (const auto & [key, value] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw SchemaViolation(where + ": unknown field '" + key + "'");
    }
  }
}

nlohmann::json vec2_json(const Vec2 & v)
{
  return nlohmann::json::array({v.x(), v.y()});
}

Vec2 vec2_from(const nlohmann::json & j, const std::string & where)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw SchemaViolation(where + ": expected [x, y]");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Eigen::VectorXd vector_from(const nlohmann::json & j, const std::string & where)
{
  if (!j.is_array()) {
    throw SchemaViolation(where + ": expected an array of numbers");
  }
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw SchemaViolation(where + ": expected an array of numbers");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace

nlohmann::json scene_to_json(const Scene & scene)
{
  nlohmann::json agents = nlohmann::json::array();
  for (const AgentTrack & track : scene.agents) {
    nlohmann::json positions = nlohmann::json::array();
    for (const Vec2 & p : track.positions) {
      positions.push_back(vec2_json(p));
    }
    nlohmann::json mask = nlohmann::json::array();
    for (const bool m : track.mask) {
      mask.push_back(m);
    }
    nlohmann::json attrs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < track.attributes.size(); ++i) {
      attrs.push_back(track.attributes(i));
    }
    agents.push_back(
      {{"id", track.id}, {"positions", positions}, {"mask", mask}, {"attributes", attrs}});
  }

  nlohmann::json lanes = nlohmann::json::array();
  for (const LaneSegment & lane : scene.lanes) {
    nlohmann::json attrs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < lane.attributes.size(); ++i) {
      attrs.push_back(lane.attributes(i));
    }
    lanes.push_back(
      {{"start", vec2_json(lane.start)}, {"end", vec2_json(lane.end)}, {"attributes", attrs}});
  }

  nlohmann::json gt = nlohmann::json::object();
  for (const auto & [id, future] : scene.ground_truth) {
    nlohmann::json steps = nlohmann::json::array();
    for (const Vec2 & p : future) {
      steps.push_back(vec2_json(p));
    }
    gt[id] = steps;
  }

  return nlohmann::json{
    {"format", "hypercast-scene"}, {"version", 1},       {"dt", scene.dt},
    {"agents", agents},            {"lanes", lanes},     {"ground_truth", gt},
  };
}

Scene scene_from_json(const nlohmann::json & j)
{
  reject_unknown_keys(
    j, {"format", "version", "dt", "agents", "lanes", "ground_truth"}, "scene");
  if (j.value("format", "") != "hypercast-scene") {
    throw SchemaViolation("scene: missing or wrong format tag");
  }
  if (j.value("version", 0) != 1) {
    throw SchemaViolation("scene: unsupported version");
  }
  if (!j.contains("dt") || !j["dt"].is_number()) {
    throw SchemaViolation("scene: dt must be a number");
  }

  Scene scene;
  scene.dt = j["dt"].get<double>();

  if (!j.contains("agents") || !j["agents"].is_array()) {
    throw SchemaViolation("scene: agents must be an array");
  }
  for (const nlohmann::json & a : j["agents"]) {
    reject_unknown_keys(a, {"id", "positions", "mask", "attributes"}, "agent");
    AgentTrack track;
    if (!a.contains("id") || !a["id"].is_string()) {
      throw SchemaViolation("agent: id must be a string");
    }
    track.id = a["id"].get<std::string>();
    if (!a.contains("positions") || !a["positions"].is_array()) {
      throw SchemaViolation("agent: positions must be an array");
    }
    for (const nlohmann::json & p : a["positions"]) {
      track.positions.push_back(vec2_from(p, "agent position"));
    }
    if (!a.contains("mask") || !a["mask"].is_array()) {
      throw SchemaViolation("agent: mask must be an array");
    }
    for (const nlohmann::json & m : a["mask"]) {
      if (!m.is_boolean()) {
        throw SchemaViolation("agent: mask entries must be booleans");
      }
      track.mask.push_back(m.get<bool>());
    }
    track.attributes = vector_from(a.value("attributes", nlohmann::json::array()), "agent attributes");
    scene.agents.push_back(std::move(track));
  }

  if (j.contains("lanes")) {
    if (!j["lanes"].is_array()) {
      throw SchemaViolation("scene: lanes must be an array");
    }
    for (const nlohmann::json & l : j["lanes"]) {
      reject_unknown_keys(l, {"start", "end", "attributes"}, "lane");
      LaneSegment lane;
      lane.start = vec2_from(l.value("start", nlohmann::json::array()), "lane start");
      lane.end = vec2_from(l.value("end", nlohmann::json::array()), "lane end");
      lane.attributes = vector_from(l.value("attributes", nlohmann::json::array()), "lane attributes");
      scene.lanes.push_back(std::move(lane));
    }
  }

  if (j.contains("ground_truth")) {
    if (!j["ground_truth"].is_object()) {
      throw SchemaViolation("scene: ground_truth must be an object");
    }
    for (const auto & [id, steps] : j["ground_truth"].items()) {
      if (!steps.is_array()) {
        throw SchemaViolation("ground_truth: expected arrays of [x, y]");
      }
      std::vector<Vec2> future;
      for (const nlohmann::json & p : steps) {
        future.push_back(vec2_from(p, "ground_truth step"));
      }
      scene.ground_truth[id] = std::move(future);
    }
  }

  scene.validate();
  return scene;
}

void save_scene(const Scene & scene, const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << scene_to_json(scene).dump(2) << "\n";
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

Scene load_scene(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception & e) {
    throw SchemaViolation(std::string("scene JSON parse error: ") + e.what());
  }
  return scene_from_json(j);
}

namespace
{

struct CsvRow
{
  double timestamp = 0.0;
  std::string track_id;
  std::string object_type;
  double x = 0.0;
  double y = 0.0;
};

std::vector<std::string> split_csv_line(const std::string & line)
{
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.push_back("");
  }
  return fields;
}

double parse_double(const std::string & s, const std::string & what)
{
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw MalformedCsv("trailing characters in " + what + ": '" + s + "'");
    }
    return v;
  } catch (const std::invalid_argument &) {
    throw MalformedCsv("cannot parse " + what + ": '" + s + "'");
  } catch (const std::out_of_range &) {
    throw MalformedCsv("out-of-range " + what + ": '" + s + "'");
  }
}

constexpr double kGridStep = 0.1;      // s
constexpr double kSnapTolerance = 0.05;  // s
constexpr int kObservedSteps = 20;
constexpr int kFutureSteps = 30;

}  // namespace

Scene load_argoverse_csv(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open: " + path);
  }

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw MalformedCsv("empty file: " + path);
  }
  if (!header_line.empty() && header_line.back() == '\r') {
    header_line.pop_back();
  }
  const std::vector<std::string> header = split_csv_line(header_line);
  const auto column = [&](const std::string & name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw MalformedCsv("missing column " + name);
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t c_time = column("TIMESTAMP");
  const size_t c_track = column("TRACK_ID");
  const size_t c_type = column("OBJECT_TYPE");
  const size_t c_x = column("X");
  const size_t c_y = column("Y");
  column("CITY_NAME");

  std::vector<CsvRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw MalformedCsv("row has fewer fields than the header");
    }
    CsvRow row;
    row.timestamp = parse_double(fields[c_time], "TIMESTAMP");
    row.track_id = fields[c_track];
    row.object_type = fields[c_type];
    row.x = parse_double(fields[c_x], "X");
    row.y = parse_double(fields[c_y], "Y");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw MalformedCsv("no data rows: " + path);
  }

  double t0 = rows.front().timestamp;
  for (const CsvRow & row : rows) {
    t0 = std::min(t0, row.timestamp);
  }

  // Aligned samples per track. Duplicate hits on one grid step resolve by
  // snap error, then timestamp, then coordinates, so row order never
  // matters.
  struct Sample
  {
    double err = 0.0;
    double timestamp = 0.0;
    Vec2 pos = Vec2::Zero();
  };
  std::map<std::string, std::map<int, Sample>> tracks;
  std::map<std::string, std::string> types;
  for (const CsvRow & row : rows) {
    const double rel = row.timestamp - t0;
    const int k = static_cast<int>(std::lround(rel / kGridStep));
    const double err = std::abs(rel - k * kGridStep);
    if (err > kSnapTolerance) {
      continue;
    }
    Sample s{err, row.timestamp, Vec2(row.x, row.y)};
    auto [it, inserted] = tracks[row.track_id].try_emplace(k, s);
    if (!inserted) {
      Sample & old = it->second;
      const auto key = [](const Sample & v) {
        return std::make_tuple(v.err, v.timestamp, v.pos.x(), v.pos.y());
      };
      if (key(s) < key(old)) {
        old = s;
      }
    }
    types[row.track_id] = row.object_type;
  }

  std::string agent_id;
  for (const auto & [id, type] : types) {
    if (type == "AGENT") {
      agent_id = id;
      break;
    }
  }
  if (agent_id.empty()) {
    throw MalformedCsv("no AGENT track: " + path);
  }

  const std::map<int, Sample> & agent_track = tracks[agent_id];
  const int k0 = agent_track.begin()->first;
  for (int k = k0; k < k0 + kObservedSteps + kFutureSteps; ++k) {
    if (agent_track.find(k) == agent_track.end()) {
      throw TooShort("AGENT track covers fewer than 50 aligned steps");
    }
  }

  Scene scene;
  scene.dt = kGridStep;

  const auto build_track = [&](const std::string & id) -> bool {
    const std::map<int, Sample> & samples = tracks[id];
    AgentTrack track;
    track.id = id;
    track.positions.assign(kObservedSteps, Vec2::Zero());
    track.mask.assign(kObservedSteps, false);
    int valid = 0;
    for (int t = 0; t < kObservedSteps; ++t) {
      const auto it = samples.find(k0 + t);
      if (it != samples.end()) {
        track.positions[t] =
          Vec2(snap_to_grid(it->second.pos.x()), snap_to_grid(it->second.pos.y()));
        track.mask[t] = true;
        ++valid;
      }
    }
    if (valid < 2) {
      return false;
    }
    // Pad gaps with the nearest observed position so geometry stays finite.
    for (int t = 0; t < kObservedSteps; ++t) {
      if (track.mask[t]) {
        continue;
      }
      int src = -1;
      for (int d = 1; d < kObservedSteps; ++d) {
        if (t - d >= 0 && track.mask[t - d]) {
          src = t - d;
          break;
        }
        if (t + d < kObservedSteps && track.mask[t + d]) {
          src = t + d;
          break;
        }
      }
      track.positions[t] = track.positions[src];
    }

    double speed_sum = 0.0;
    int speed_count = 0;
    for (int t = 1; t < kObservedSteps; ++t) {
      if (track.mask[t] && track.mask[t - 1]) {
        speed_sum += (track.positions[t] - track.positions[t - 1]).norm() / kGridStep;
        ++speed_count;
      }
    }
    const bool central = (id == agent_id);
    track.attributes = Eigen::Vector4d(
      1.0, central ? 1.0 : 0.0, speed_count > 0 ? speed_sum / speed_count / 30.0 : 0.0,
      types[id] == "AV" ? 0.25 : (central ? 0.0 : 0.5));

    std::vector<Vec2> future;
    bool complete = true;
    for (int t = 0; t < kFutureSteps; ++t) {
      const auto it = samples.find(k0 + kObservedSteps + t);
      if (it == samples.end()) {
        complete = false;
        break;
      }
      future.emplace_back(snap_to_grid(it->second.pos.x()), snap_to_grid(it->second.pos.y()));
    }
    if (complete) {
      scene.ground_truth[id] = std::move(future);
    }
    scene.agents.push_back(std::move(track));
    return true;
  };

  if (!build_track(agent_id)) {
    throw TooShort("AGENT track has too few observed steps");
  }
  for (const auto & [id, samples] : tracks) {
    if (id != agent_id) {
      build_track(id);
    }
  }

  scene.validate();
  return scene;
}

void save_manifest(const Manifest & manifest, const std::string & path)
{
  nlohmann::json entries = nlohmann::json::array();
  for (const DatasetEntry & e : manifest.entries) {
    entries.push_back({{"path", e.path}, {"split", e.split}, {"kind", e.kind}, {"seed", e.seed}});
  }
  const nlohmann::json j{
    {"format", "hypercast-manifest"}, {"version", 1}, {"scenes", entries}};
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

Manifest load_manifest(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception & e) {
    throw SchemaViolation(std::string("manifest JSON parse error: ") + e.what());
  }
  reject_unknown_keys(j, {"format", "version", "scenes"}, "manifest");
  if (j.value("format", "") != "hypercast-manifest" || j.value("version", 0) != 1) {
    throw SchemaViolation("manifest: missing or wrong format tag");
  }
  Manifest manifest;
  for (const nlohmann::json & e : j.value("scenes", nlohmann::json::array())) {
    reject_unknown_keys(e, {"path", "split", "kind", "seed"}, "manifest entry");
    DatasetEntry entry;
    entry.path = e.value("path", "");
    entry.split = e.value("split", "");
    entry.kind = e.value("kind", "");
    entry.seed = e.value("seed", static_cast<uint64_t>(0));
    if (entry.path.empty() || (entry.split != "train" && entry.split != "val")) {
      throw SchemaViolation("manifest entry: need a path and a train/val split");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

std::vector<std::string> split_paths(
  const Manifest & manifest, const std::string & manifest_path, const std::string & split)
{
  const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<std::string> paths;
  for (const DatasetEntry & e : manifest.entries) {
    if (e.split == split) {
      paths.push_back((dir / e.path).string());
    }
  }
  return paths;
}

}  // namespace hypercast
