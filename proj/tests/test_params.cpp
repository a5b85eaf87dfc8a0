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

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "hypercast/config.hpp"
#include "hypercast/errors.hpp"
#include "hypercast/params.hpp"
#include "hypercast/rng.hpp"

namespace
{

using hypercast::Checkpoint;
using hypercast::ParamStore;
using hypercast::Rng;

std::string temp_path(const std::string & name)
{
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string file_bytes(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(
    (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Checkpoint sample_checkpoint(uint64_t seed)
{
  Checkpoint ckpt;
  ckpt.stage = 2;
  ckpt.config = hypercast::ModelConfig{}.to_json();
  Rng rng(seed);
  Eigen::MatrixXd a(3, 4);
  Eigen::MatrixXd b(1, 5);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      a(r, c) = rng.normal(0.0, 1.0);
    }
  }
  for (int c = 0; c < 5; ++c) {
    b(0, c) = rng.uniform(-1.0, 1.0);
  }
  // Values that stress exact binary round-trips.
  a(0, 0) = 0.1 + 0.2;
  a(0, 1) = -0.0;
  a(0, 2) = 1e-300;
  ckpt.params.add("block.w", a);
  ckpt.params.add("block.b", b);
  return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round-trip preserves every bit")
{
  const Checkpoint ckpt = sample_checkpoint(21);
  const std::string path = temp_path("hypercast_params_rt.ckpt");
  hypercast::save_checkpoint(ckpt, path);
  const Checkpoint back = hypercast::load_checkpoint(path);

  CHECK(back.stage == ckpt.stage);
  CHECK(back.config == ckpt.config);
  REQUIRE(back.params.count() == ckpt.params.count());
  for (const auto & [name, value] : ckpt.params.values()) {
    REQUIRE(back.params.has(name));
    const Eigen::MatrixXd & got = back.params.at(name);
    REQUIRE(got.rows() == value.rows());
    REQUIRE(got.cols() == value.cols());
    for (Eigen::Index r = 0; r < value.rows(); ++r) {
      for (Eigen::Index c = 0; c < value.cols(); ++c) {
        const double x = value(r, c);
        const double y = got(r, c);
        CHECK(std::memcmp(&x, &y, sizeof(double)) == 0);
      }
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("identical checkpoints serialize to identical bytes")
{
  const std::string p1 = temp_path("hypercast_params_a.ckpt");
  const std::string p2 = temp_path("hypercast_params_b.ckpt");
  hypercast::save_checkpoint(sample_checkpoint(33), p1);
  hypercast::save_checkpoint(sample_checkpoint(33), p2);
  CHECK(file_bytes(p1) == file_bytes(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("loading a missing checkpoint throws IoError")
{
  CHECK_THROWS_AS(
    hypercast::load_checkpoint(temp_path("hypercast_does_not_exist.ckpt")),
    hypercast::IoError);
}

TEST_CASE("loading a corrupt checkpoint throws")
{
  const std::string path = temp_path("hypercast_params_corrupt.ckpt");
  std::ofstream(path, std::ios::binary) << "not msgpack at all";
  CHECK_THROWS_AS(hypercast::load_checkpoint(path), hypercast::IoError);
  std::remove(path.c_str());
}

TEST_CASE("param store rejects duplicate names and unknown lookups")
{
  ParamStore store;
  store.add("x", Eigen::MatrixXd::Zero(1, 1));
  CHECK_THROWS_AS(store.add("x", Eigen::MatrixXd::Zero(1, 1)), hypercast::ConfigError);
  CHECK_THROWS_AS(store.at("missing"), hypercast::MissingComponent);
}

TEST_CASE("model config json round-trip and unknown-key rejection")
{
  hypercast::ModelConfig cfg;
  cfg.hidden_dim = 48;
  cfg.num_modes = 5;
  cfg.stage = 3;
  const nlohmann::json j = cfg.to_json();
  const hypercast::ModelConfig back = hypercast::ModelConfig::from_json(j);
  CHECK(back.to_json() == j);

  nlohmann::json bad = j;
  bad["not_a_field"] = 1;
  CHECK_THROWS_AS(hypercast::ModelConfig::from_json(bad), hypercast::ConfigError);
}

TEST_CASE("rng is portable across runs and decoupled streams")
{
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  // Frozen first draws guard against accidental engine or mapping changes.
  Rng c(1);
  CHECK(c.next_u64() == 2469588189546311528ull);
  Rng d(1);
  const double u = d.uniform();
  CHECK(u == doctest::Approx(0.13387664401253263).epsilon(1e-12));
}
