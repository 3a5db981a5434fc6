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

#include "fixtures.hpp"
#include "rumax/optimizer.hpp"

using namespace rumax;
using namespace rumax::testing;
using Catch::Matchers::WithinAbs;

namespace {

UtilitySpec pl_min_x_1() {
  return UtilitySpec::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}});
}

UtilitySpec pl_min_x_2() {
  return UtilitySpec::piecewise_linear({{0.0, 0.0}, {2.0, 2.0}, {3.0, 2.0}});
}

}  // namespace

TEST_CASE("constraint systems by mode") {
  ModelFamily coin = coin_family();
  CHECK(constraint_system(coin, 1.0, AdmissibilityMode::Unconstrained).rows.empty());

  ConstraintSystem inter = constraint_system(coin, 1.0, AdmissibilityMode::Intermediate);
  REQUIRE(inter.rows.size() == 2);  // 1 + phi >= 0 and 1 - phi >= 0
  CHECK(inter.feasible({1.0}));
  CHECK(inter.feasible({-1.0}));
  CHECK_FALSE(inter.feasible({1.5}));
  CHECK_FALSE(inter.feasible({-1.5}));
}

TEST_CASE("gap family feasibility depends on the mode") {
  ModelFamily gap = terminal_gap_family(100.0, 201);
  ConstraintSystem inter = constraint_system(gap, 1.0, AdmissibilityMode::Intermediate);
  ConstraintSystem term = constraint_system(gap, 1.0, AdmissibilityMode::TerminalOnly);
  StrategyLayout layout(gap.t(), 1);

  Strategy ones = Strategy::constant(gap.t(), {vec1(1.0), vec1(1.0)});
  std::vector<double> x = layout.pack(gap.t(), ones);
  CHECK(term.feasible(x));
  CHECK_FALSE(inter.feasible(x));  // first-period wealth dives at X = -M

  // any intermediate-feasible first-period position obeys |phi_1| <= 1/M
  std::vector<double> probe(layout.total, 0.0);
  probe[0] = 1.0 / 100.0 + 1e-6;
  CHECK_FALSE(inter.feasible(probe));
  probe[0] = 1.0 / 100.0 - 1e-9;
  bool ok_first_period = true;
  for (const auto& row : inter.rows) {
    bool touches_later = false;
    for (auto [j, a] : row) touches_later = touches_later || j > 0;
    if (!touches_later && 1.0 + detail::eval_terms(row, probe) < -1e-12)
      ok_first_period = false;
  }
  CHECK(ok_first_period);
}

TEST_CASE("robust evaluation basics") {
  ModelFamily gap = terminal_gap_family(100.0, 201);
  UtilitySpec u = UtilitySpec::capped_sqrt(2.0);

  Strategy safe = Strategy::zero(gap.t(), 1);
  CHECK_THAT(evaluate_robust(safe, gap, u, 1.0), WithinAbs(1.0, 1e-12));

  Strategy ones = Strategy::constant(gap.t(), {vec1(1.0), vec1(1.0)});
  CHECK_THAT(evaluate_robust(ones, gap, u, 1.0), WithinAbs(1.25, 1e-12));
  auto worst = worst_models_at(ones, gap, u, 1.0);
  REQUIRE(worst.size() == 1);
  CHECK(worst[0] == "Sstar");

  // a strategy with negative terminal wealth under some model
  Strategy reckless = Strategy::constant(gap.t(), {vec1(0.0), vec1(10.0)});
  CHECK(evaluate_robust(reckless, gap, u, 1.0) == kNegInf);
}

TEST_CASE("exact solver on the coin flip matches the oracle") {
  ModelFamily coin = coin_family();
  RobustSolution sol = solve_lp(coin, pl_min_x_1(), 1.0, AdmissibilityMode::Intermediate);
  double oracle = brute_force_oracle(coin, pl_min_x_1(), 1.0,
                                     AdmissibilityMode::Intermediate, 2.0, 401);
  CHECK_THAT(sol.value, WithinAbs(1.0, 1e-9));
  CHECK_THAT(sol.strategy.values[0][0][0], WithinAbs(0.0, 1e-9));
  CHECK_THAT(oracle, WithinAbs(1.0, 1e-9));
}

TEST_CASE("two opposed models keep the safe portfolio optimal") {
  ModelFamily family = one_step_family({
      {vec1(-1.0), vec1(3.0)},
      {vec1(-3.0), vec1(1.0)},
  });
  RobustSolution sol = solve_lp(family, pl_min_x_2(), 1.0, AdmissibilityMode::Intermediate);
  CHECK_THAT(sol.value, WithinAbs(1.0, 1e-9));
  CHECK_THAT(sol.strategy.values[0][0][0], WithinAbs(0.0, 1e-9));
  double oracle = brute_force_oracle(family, pl_min_x_2(), 1.0,
                                     AdmissibilityMode::Intermediate, 1.0, 401);
  CHECK_THAT(sol.value, WithinAbs(oracle, 1e-6));
}

TEST_CASE("terminal mode on the gap family clears five fourths") {
  ModelFamily gap = terminal_gap_family(100.0, 201);
  PlApproximation pl = pl_under_approximation(UtilitySpec::capped_sqrt(2.0),
                                              {0.0, 1.0, 4.0, 4.5, 5.5});
  RobustSolution sol = solve_lp(gap, pl.pl, 1.0, AdmissibilityMode::TerminalOnly);
  CHECK(sol.value >= 1.25 - 1e-9);
  CHECK_FALSE(sol.box_active);
}

TEST_CASE("oracle equivalence on a two-period binary market") {
  ModelFamily family = bachelier_family(2, 0.5, 0.0, {{1.0, 0.25}});
  UtilitySpec pl = pl_min_x_2();
  RobustSolution sol = solve_lp(family, pl, 1.0, AdmissibilityMode::Intermediate);
  double oracle = brute_force_oracle(family, pl, 1.0, AdmissibilityMode::Intermediate,
                                     2.0, 201);
  CHECK(sol.value >= oracle - 1e-9);
  CHECK(sol.value <= oracle + 4.0 * (4.0 / 200.0));
}

TEST_CASE("oracle rejects too many coordinates") {
  ModelFamily family = bachelier_family(3, 0.5, 0.0, {{1.0, 0.0}});
  CHECK_THROWS_AS(brute_force_oracle(family, pl_min_x_1(), 1.0,
                                     AdmissibilityMode::Intermediate, 1.0, 11),
                  TooManyDimensions);
}

TEST_CASE("supergradient ascent approaches the grid oracle") {
  ModelFamily coin = coin_family();
  UtilitySpec log_u = UtilitySpec::log_utility();
  SupergradientOptions opts;
  opts.iters = 600;
  RobustSolution sol = solve_supergradient(coin, log_u, 1.0, AdmissibilityMode::Intermediate, opts);
  CHECK_THAT(sol.value, WithinAbs(0.0, 1e-3));
  CHECK(sol.gap_bound <= 2e-3);

  ModelFamily bach = bachelier_family(2, 0.5, 0.0, {{1.0, 0.3}});
  RobustSolution sol2 =
      solve_supergradient(bach, log_u, 5.0, AdmissibilityMode::Intermediate, opts);
  double oracle = brute_force_oracle(bach, log_u, 5.0, AdmissibilityMode::Intermediate,
                                     3.0, 401);
  CHECK_THAT(sol2.value, WithinAbs(oracle, 1e-3));
}

TEST_CASE("supergradient value never exceeds the certified sandwich") {
  ModelFamily family = bachelier_family(2, 0.4, 0.0, {{1.0, 0.2}, {1.0, -0.1}});
  UtilitySpec u = UtilitySpec::capped_sqrt(2.0);
  SupergradientOptions opts;
  opts.iters = 300;
  RobustSolution sol = solve_supergradient(family, u, 1.0, AdmissibilityMode::Intermediate, opts);
  CHECK(sol.gap_bound >= 0.0);
  CHECK(sol.gap_bound < 0.05);
  CHECK(sol.value >= 1.0 - 1e-9);  // safe portfolio is always available
}

TEST_CASE("domain violation at the start is reported") {
  ModelFamily coin = coin_family();
  CHECK_THROWS_AS(solve_supergradient(coin, UtilitySpec::log_utility(), -1.0,
                                      AdmissibilityMode::Intermediate),
                  DomainViolationAtStart);
}

TEST_CASE("robust objective is concave along random segments") {
  Rng rng(401);
  ModelFamily family = bachelier_family(2, 0.5, 0.0, {{1.0, 0.2}, {1.5, -0.3}});
  UtilitySpec u = pl_min_x_2();
  StrategyLayout layout(family.t(), 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(layout.total), b(layout.total);
    for (double& v : a) v = rng.uniform(-0.3, 0.3);
    for (double& v : b) v = rng.uniform(-0.3, 0.3);
    double lam = rng.uniform();
    std::vector<double> mix(layout.total);
    for (int j = 0; j < layout.total; ++j) mix[j] = lam * a[j] + (1 - lam) * b[j];
    double va = evaluate_robust(layout.unpack(family.t(), a), family, u, 1.0);
    double vb = evaluate_robust(layout.unpack(family.t(), b), family, u, 1.0);
    double vm = evaluate_robust(layout.unpack(family.t(), mix), family, u, 1.0);
    CHECK(vm >= lam * va + (1 - lam) * vb - 1e-9);
  }
}

TEST_CASE("solver value dominates the safe portfolio") {
  Rng rng(409);
  for (int trial = 0; trial < 10; ++trial) {
    ModelFamily family = random_family(rng, 2, 3, 1, 2);
    UtilitySpec u = pl_min_x_1();
    RobustSolution sol = solve_lp(family, u, 1.0, AdmissibilityMode::Intermediate);
    CHECK(sol.value >= u(1.0) - 1e-9);
  }
}

TEST_CASE("single-model robust solve is the classical solve") {
  ModelFamily family = bachelier_family(2, 0.5, 0.0, {{1.0, 0.25}});
  UtilitySpec u = pl_min_x_2();
  RobustSolution robust = solve_lp(family, u, 1.0, AdmissibilityMode::Intermediate);

  // duplicating the single model changes nothing
  ModelFamily doubled = family;
  PriceModel copy = family.models[0];
  copy.name = "copy";
  doubled.models.push_back(copy);
  RobustSolution doubled_sol = solve_lp(doubled, u, 1.0, AdmissibilityMode::Intermediate);
  CHECK_THAT(robust.value, WithinAbs(doubled_sol.value, 1e-9));
}

TEST_CASE("admissibility modes order the value and collapse for one NA model") {
  UtilitySpec u = pl_min_x_2();

  for (auto&& family :
       {bachelier_family(2, 0.5, 0.0, {{1.0, 0.25}}), coin_family(),
        bachelier_family(1, 0.3, 0.0, {{2.0, 0.5}})}) {
    RobustSolution inter = solve_lp(family, u, 1.0, AdmissibilityMode::Intermediate);
    RobustSolution term = solve_lp(family, u, 1.0, AdmissibilityMode::TerminalOnly);
    CHECK(inter.value <= term.value + 1e-9);
    // one arbitrage-free model: running and terminal admissibility coincide
    CHECK_THAT(inter.value, WithinAbs(term.value, 1e-9));
  }

  ModelFamily gap = terminal_gap_family(100.0, 201);
  PlApproximation pl = pl_under_approximation(UtilitySpec::capped_sqrt(2.0),
                                              {0.0, 1.0, 4.0, 4.5, 5.5});
  RobustSolution inter = solve_lp(gap, pl.pl, 1.0, AdmissibilityMode::Intermediate);
  RobustSolution term = solve_lp(gap, pl.pl, 1.0, AdmissibilityMode::TerminalOnly);
  CHECK(inter.value <= term.value + 1e-9);
  CHECK(term.value - inter.value >= 0.23);
}

TEST_CASE("additive shifts move the value and keep the argmax") {
  ModelFamily family = bachelier_family(2, 0.5, 0.0, {{1.0, 0.25}, {1.0, -0.25}});
  UtilitySpec u = pl_min_x_2();
  UtilitySpec shifted = UtilitySpec::piecewise_linear(
      {{0.0, 10.0}, {2.0, 12.0}, {3.0, 12.0}});
  RobustSolution base = solve_lp(family, u, 1.0, AdmissibilityMode::Intermediate);
  RobustSolution moved = solve_lp(family, shifted, 1.0, AdmissibilityMode::Intermediate);
  CHECK_THAT(moved.value - 10.0, WithinAbs(base.value, 1e-9));
}

TEST_CASE("unconstrained mode reports a binding box for runaway programs") {
  // a deterministic gain and an unbounded utility push the position onto
  // the artificial box, which the solution flags
  ModelFamily family = one_step_family({{vec1(1.0), vec1(2.0)}});
  UtilitySpec linearish = UtilitySpec::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}});
  SolveOptions opts;
  opts.box = 50.0;
  RobustSolution sol = solve_lp(family, linearish, 1.0, AdmissibilityMode::Unconstrained, opts);
  CHECK(sol.box_active);
  CHECK(sol.value > 50.0);
}
