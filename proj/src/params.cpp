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

#include "hypercast/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hypercast/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian host");

namespace hypercast
{

Eigen::MatrixXd & ParamStore::add(const std::string & name, Eigen::MatrixXd value)
{
  auto [it, inserted] = values_.emplace(name, std::move(value));
  if (!inserted) {
    throw ConfigError("duplicate parameter: " + name);
  }
  return it->second;
}

const Eigen::MatrixXd & ParamStore::at(const std::string & name) const
{
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw MissingComponent("parameter not found: " + name);
  }
  return it->second;
}

Eigen::MatrixXd & ParamStore::mutable_at(const std::string & name)
{
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw MissingComponent("parameter not found: " + name);
  }
  return it->second;
}

ad::Ref ParamStore::use(ad::Graph & g, const std::string & name) const
{
  return g.param(name, at(name));
}

void ParamStore::accumulate_grads(const ad::Graph & g)
{
  for (const auto & [name, grad] : g.param_grads()) {
    auto it = grads_.find(name);
    if (it == grads_.end()) {
      grads_.emplace(name, *grad);
    } else {
      it->second += *grad;
    }
  }
}

void ParamStore::zero_grads()
{
  grads_.clear();
}

size_t ParamStore::scalar_count() const
{
  size_t n = 0;
  for (const auto & [name, v] : values_) {
    n += static_cast<size_t>(v.size());
  }
  return n;
}

bool ParamStore::all_finite() const
{
  for (const auto & [name, v] : values_) {
    if (!v.allFinite()) {
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd kaiming_uniform(Rng & rng, int rows, int cols, int fan_in)
{
  const double bound = std::sqrt(6.0 / static_cast<double>(std::max(fan_in, 1)));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
  return m;
}

namespace
{

constexpr int kFormatVersion = 1;

std::vector<uint8_t> matrix_bytes(const Eigen::MatrixXd & m)
{
  std::vector<uint8_t> out(static_cast<size_t>(m.size()) * sizeof(double));
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor rm = m;
  std::memcpy(out.data(), rm.data(), out.size());
  return out;
}

Eigen::MatrixXd bytes_matrix(const std::vector<uint8_t> & bytes, int rows, int cols)
{
  if (bytes.size() != static_cast<size_t>(rows) * cols * sizeof(double)) {
    throw ShapeMismatch("checkpoint array byte count does not match its shape");
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor rm(rows, cols);
  std::memcpy(rm.data(), bytes.data(), bytes.size());
  return rm;
}

}  // namespace

void save_checkpoint(const Checkpoint & ckpt, const std::string & path)
{
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["stage"] = ckpt.stage;
  j["config"] = ckpt.config;
  nlohmann::json params = nlohmann::json::object();
  for (const auto & [name, m] : ckpt.params.values()) {
    nlohmann::json entry;
    entry["rows"] = static_cast<int>(m.rows());
    entry["cols"] = static_cast<int>(m.cols());
    entry["data"] = nlohmann::json::binary(matrix_bytes(m));
    params[name] = std::move(entry);
  }
  j["params"] = std::move(params);
  std::vector<uint8_t> blob = nlohmann::json::to_msgpack(j);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open checkpoint for writing: " + path);
  }
  out.write(reinterpret_cast<const char *>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) {
    throw IoError("short write on checkpoint: " + path);
  }
}

Checkpoint load_checkpoint(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path);
  }
  std::vector<uint8_t> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::from_msgpack(blob);
  } catch (const nlohmann::json::exception & e) {
    throw IoError("checkpoint is not valid MessagePack: " + std::string(e.what()));
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion) {
    throw IoError("unsupported checkpoint format version");
  }
  Checkpoint ckpt;
  ckpt.stage = j.at("stage").get<int>();
  ckpt.config = j.value("config", nlohmann::json::object());
  for (const auto & [name, entry] : j.at("params").items()) {
    int rows = entry.at("rows").get<int>();
    int cols = entry.at("cols").get<int>();
    const auto & bin = entry.at("data").get_binary();
    ckpt.params.add(name, bytes_matrix(bin, rows, cols));
  }
  if (!ckpt.params.all_finite()) {
    throw IoError("checkpoint contains non-finite values");
  }
  return ckpt;
}

}  // namespace hypercast
