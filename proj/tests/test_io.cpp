// Copyright 2026 The Rumax Authors
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

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "fixtures.hpp"
#include "rumax/generators.hpp"
#include "rumax/io.hpp"

using namespace rumax;
using namespace rumax::testing;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/rumax_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

bool families_identical(const ModelFamily& a, const ModelFamily& b) {
  if (a.assets != b.assets) return false;
  if (a.t().node_count() != b.t().node_count()) return false;
  for (int id = 0; id < a.t().node_count(); ++id) {
    if (a.t().node(id).parent != b.t().node(id).parent) return false;
    if (a.t().node(id).cond_prob != b.t().node(id).cond_prob) return false;
  }
  if (a.models.size() != b.models.size()) return false;
  for (std::size_t m = 0; m < a.models.size(); ++m) {
    if (a.models[m].name != b.models[m].name) return false;
    if (a.models[m].initial != b.models[m].initial) return false;
    for (int id = 1; id < a.t().node_count(); ++id)
      if (a.models[m].increment(id) != b.models[m].increment(id)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("round trip is the identity, bit for bit") {
  TempFile file("roundtrip.json");
  for (auto&& family : {coin_family(), terminal_gap_family(10.0, 5), two_drift_family(),
                        bachelier_family(3, 0.37, 1.25, {{1.0, 0.1}, {2.0, -0.7}})}) {
    save_market(family, file.path);
    ModelFamily loaded = load_market(file.path);
    CHECK(families_identical(family, loaded));

    // a second bounce reproduces the same bytes
    TempFile file2("roundtrip2.json");
    save_market(loaded, file2.path);
    std::ifstream f1(file.path), f2(file2.path);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
  }
}

TEST_CASE("missing increments are reported with the node path") {
  TempFile file("missing.json");
  std::ofstream(file.path) << R"({
    "horizon": 1, "assets": 1,
    "models": [{"name": "a", "initial": [0]}, {"name": "b", "initial": [0]}],
    "root": {"children": [
      {"prob": 0.5, "increments": {"a": [1.0], "b": [2.0]}},
      {"prob": 0.5, "increments": {"a": [-1.0]}}
    ]}
  })";
  try {
    load_market(file.path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("root/1") != std::string::npos);
    CHECK(std::string(e.what()).find("model b") != std::string::npos);
  }
}

TEST_CASE("probability violations surface with the node path") {
  TempFile file("badprob.json");
  std::ofstream(file.path) << R"({
    "horizon": 1, "assets": 1,
    "models": [{"name": "a", "initial": [0]}],
    "root": {"children": [
      {"prob": 0.7, "increments": {"a": [1.0]}},
      {"prob": 0.2, "increments": {"a": [-1.0]}}
    ]}
  })";
  try {
    load_market(file.path);
    FAIL("expected ProbabilitySumViolation");
  } catch (const ProbabilitySumViolation& e) {
    CHECK(std::string(e.what()).find("root") != std::string::npos);
  }
}

TEST_CASE("defective files are rejected") {
  TempFile file("defect.json");
  std::ofstream(file.path) << "{ not json";
  CHECK_THROWS_AS(load_market(file.path), SchemaError);

  std::ofstream(file.path) << R"({"horizon": 1, "assets": 1, "models": []})";
  CHECK_THROWS_AS(load_market(file.path), SchemaError);

  CHECK_THROWS_AS(load_market("/nonexistent/dir/x.json"), IOError);
}
