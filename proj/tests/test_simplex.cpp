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
#include <cmath>
#include <limits>

#include "rumax/rng.hpp"
#include "rumax/simplex.hpp"

using namespace rumax;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("two variable maximisation with inequality rows") {
  // max 3x + 2y, x + y <= 4, x + 3y <= 6, 0 <= x,y <= 10
  DenseSimplex lp({3.0, 2.0}, {0.0, 0.0}, {10.0, 10.0});
  lp.add_row({{{0, 1.0}, {1, 1.0}}, 'L', 4.0});
  lp.add_row({{{0, 1.0}, {1, 3.0}}, 'L', 6.0});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.objective_value(), Catch::Matchers::WithinAbs(12.0, 1e-9));
  CHECK_THAT(lp.solution()[0], Catch::Matchers::WithinAbs(4.0, 1e-9));
  CHECK_THAT(lp.solution()[1], Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("equality rows force phase one") {
  // max x + y st x + y = 1, x - y = 0 -> x = y = 1/2
  DenseSimplex lp({1.0, 1.0}, {-kInf, -kInf}, {kInf, kInf});
  lp.add_row({{{0, 1.0}, {1, 1.0}}, 'E', 1.0});
  lp.add_row({{{0, 1.0}, {1, -1.0}}, 'E', 0.0});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.solution()[0], Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK_THAT(lp.solution()[1], Catch::Matchers::WithinAbs(0.5, 1e-9));
}

TEST_CASE("infeasible program is detected") {
  DenseSimplex lp({1.0}, {0.0}, {kInf});
  lp.add_row({{{0, 1.0}}, 'L', 1.0});
  lp.add_row({{{0, 1.0}}, 'G', 2.0});
  REQUIRE(lp.solve() == LpStatus::Infeasible);
}

TEST_CASE("unbounded direction is detected") {
  DenseSimplex lp({1.0}, {0.0}, {kInf});
  lp.add_row({{{0, -1.0}}, 'L', 1.0});
  REQUIRE(lp.solve() == LpStatus::Unbounded);
}

TEST_CASE("free variables pinned off zero still solve") {
  // max -|x - 3| style: max x with x <= 3 as the binding row, x free
  DenseSimplex lp({1.0}, {-kInf}, {kInf});
  lp.pin(0, -7.0);
  lp.add_row({{{0, 1.0}}, 'L', 3.0});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.solution()[0], Catch::Matchers::WithinAbs(3.0, 1e-9));
}

TEST_CASE("rows added after a solve re-optimise from the old basis") {
  DenseSimplex lp({1.0, 1.0}, {0.0, 0.0}, {kInf, kInf});
  lp.add_row({{{0, 1.0}, {1, 2.0}}, 'L', 4.0});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.objective_value(), Catch::Matchers::WithinAbs(4.0, 1e-9));

  lp.add_row({{{0, 1.0}}, 'L', 1.5});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.objective_value(), Catch::Matchers::WithinAbs(1.5 + 1.25, 1e-9));

  lp.add_row({{{0, 1.0}, {1, 1.0}}, 'E', 2.0});
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK_THAT(lp.objective_value(), Catch::Matchers::WithinAbs(2.0, 1e-9));
}

TEST_CASE("random programs agree with exhaustive vertex enumeration") {
  // Small dense LPs over a box; the brute force checks every basis of the
  // active-constraint system, which is exact at this size.
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + (trial % 2);
    const int m = 3 + (trial % 3);
    std::vector<double> c(n), lo(n, -2.0), hi(n, 2.0);
    for (double& v : c) v = std::round(rng.uniform(-3.0, 3.0) * 4.0) / 4.0;
    DenseSimplex lp(c, lo, hi);
    std::vector<LpRow> rows;
    for (int i = 0; i < m; ++i) {
      LpRow row;
      for (int j = 0; j < n; ++j) {
        double a = std::round(rng.uniform(-2.0, 2.0) * 2.0) / 2.0;
        if (a != 0.0) row.terms.emplace_back(j, a);
      }
      row.sense = 'L';
      row.rhs = std::round(rng.uniform(0.5, 3.0) * 2.0) / 2.0;
      rows.push_back(row);
      lp.add_row(row);
    }
    REQUIRE(lp.solve() == LpStatus::Optimal);

    // brute force over a fine grid (feasible set contains 0, so Optimal)
    double best = -1e100;
    const int steps = 40;
    std::vector<int> idx(n, 0);
    while (true) {
      double obj = 0.0;
      bool ok = true;
      std::vector<double> x(n);
      for (int j = 0; j < n; ++j) {
        x[j] = -2.0 + 4.0 * idx[j] / steps;
        obj += c[j] * x[j];
      }
      for (const auto& row : rows) {
        double ax = 0.0;
        for (auto [j, a] : row.terms) ax += a * x[j];
        if (ax > row.rhs + 1e-12) { ok = false; break; }
      }
      if (ok) best = std::max(best, obj);
      int k = 0;
      while (k < n && ++idx[k] > steps) idx[k++] = 0;
      if (k == n) break;
    }
    // grid is a subset of the feasible set: LP must weakly dominate, and by
    // Lipschitz continuity it cannot exceed the grid max by more than one cell
    const double cell = 4.0 / steps;
    double lipschitz = 0.0;
    for (double v : c) lipschitz += std::abs(v);
    CHECK(lp.objective_value() >= best - 1e-9);
    CHECK(lp.objective_value() <= best + lipschitz * cell + 1e-9);
  }
}
