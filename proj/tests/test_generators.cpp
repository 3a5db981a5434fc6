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
#include "rumax/consistency.hpp"
#include "rumax/emm.hpp"
#include "rumax/generators.hpp"
#include "rumax/hypotheses.hpp"
#include "rumax/optimizer.hpp"

using namespace rumax;
using namespace rumax::testing;
using Catch::Matchers::WithinAbs;

TEST_CASE("binary family fundamentals") {
  ModelFamily coin = bachelier_family(1, 0.5, 0.0, {{1.0, 0.0}});
  CHECK(coin.t().leaf_count() == 2);
  CHECK(coin.models[0].increment(1)[0] == 1.0);
  CHECK(coin.models[0].increment(2)[0] == -1.0);

  // strong drift destroys one-step no-arbitrage
  ModelFamily drift = bachelier_family(1, 0.5, 0.0, {{1.0, 2.0}});
  CHECK_FALSE(na_check(drift.t(), drift.models[0]).na);

  CHECK_THROWS_AS(bachelier_family(0, 0.5, 0.0, {{1.0, 0.0}}), BadParameters);
  CHECK_THROWS_AS(bachelier_family(1, 1.5, 0.0, {{1.0, 0.0}}), BadParameters);
}

TEST_CASE("leaf probabilities follow the product law exactly") {
  for (int T : {1, 3, 7, 10}) {
    double p = 0.3;
    ModelFamily family = bachelier_family(T, p, 0.0, {{1.0, 0.0}});
    const FilteredTree& tree = family.t();
    for (int leaf : tree.leaves()) {
      double expected = 1.0;
      for (int id : tree.path_to(leaf)) {
        if (tree.node(id).parent < 0) continue;
        expected *= tree.node(id).label == "u" ? p : 1.0 - p;
      }
      CHECK(tree.node(leaf).path_prob == expected);
    }
  }
}

TEST_CASE("terminal gap family parameter validation") {
  CHECK_THROWS_AS(terminal_gap_family(0.5, 5), BadParameters);
  CHECK_THROWS_AS(terminal_gap_family(10.0, 4), BadParameters);
  CHECK_THROWS_AS(terminal_gap_family(10.0, 1), BadParameters);
}

TEST_CASE("two drift family reproduces the documented supports") {
  ModelFamily family = two_drift_family();
  const FilteredTree& tree = family.t();
  const PriceModel& theta1 = family.model("theta1");

  // first-period prices 0.1 +- 1, second-period prices 0.4 + {-2, 0, +2}
  std::vector<double> s1, s2;
  for (int id : tree.nodes_at_depth(1)) s1.push_back(theta1.price_at(tree, id)[0]);
  for (int id : tree.nodes_at_depth(2)) s2.push_back(theta1.price_at(tree, id)[0]);
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  CHECK_THAT(s1.front(), WithinAbs(-0.9, 1e-12));
  CHECK_THAT(s1.back(), WithinAbs(1.1, 1e-12));
  CHECK_THAT(s2.front(), WithinAbs(-1.6, 1e-12));
  CHECK_THAT(s2.back(), WithinAbs(2.4, 1e-12));

  // the second marginal puts mass 1/4, 1/2, 1/4 on {0.4-2, 0.4, 0.4+2}
  TwoPeriodLaw law = path_law(tree, theta1);
  double mid_mass = 0.0;
  for (const auto& atom : law.atoms)
    if (std::abs(atom.x2 - 0.4) < 1e-12) mid_mass += atom.mass;
  CHECK_THAT(mid_mass, WithinAbs(0.5, 1e-12));

  CHECK(na_check(tree, theta1).na);
  CHECK(na_check(tree, family.model("theta2")).na);
  auto stars = assumption_na(family);
  CHECK(stars.size() == 2);
}

TEST_CASE("two drift laws are not time consistent") {
  ModelFamily family = two_drift_family();
  std::vector<TwoPeriodLaw> laws = {path_law(family.t(), family.models[0]),
                                    path_law(family.t(), family.models[1])};
  TimeConsistencyVerdict verdict = time_consistency_check(laws);
  CHECK_FALSE(verdict.consistent);
  CHECK(verdict.witness == "P_0^1 (x) P_1^2");

  // closing the family under recombination restores consistency
  std::vector<TwoPeriodLaw> closure = recombination_closure(laws);
  CHECK(closure.size() == 4);
  CHECK(time_consistency_check(closure).consistent);

  // singleton families are trivially consistent
  CHECK(time_consistency_check({laws[0]}).consistent);
}

TEST_CASE("path laws insist on two periods and one asset") {
  ModelFamily coin = coin_family();
  CHECK_THROWS_AS(path_law(coin.t(), coin.models[0]), UnsupportedHorizon);
}

TEST_CASE("complete market call has a unique pricing model") {
  ModelFamily coin = coin_family();
  // payoff of a call struck at zero on the stock: S_1 in {1, -1}
  RandomVariable call({1.0, 0.0});
  Eigen::VectorXd price(1);
  price[0] = 0.5;
  OptionFamilyResult result =
      option_price_family(coin.tree, coin.models[0], {call}, price, 3);
  CHECK(result.family.models.size() == 1);
  CHECK_THAT(result.family.models[0].initial[0], WithinAbs(0.5, 1e-9));
  CHECK(verify_martingale(coin.t(), result.family.models[0], result.measures[0]).martingale);
}

TEST_CASE("incomplete market yields several pricing models") {
  // four-branch one-step stock: martingale measures form a two-parameter
  // family, one call pins a single direction, so distinct measures remain
  ModelFamily stock = one_step_family(
      {{vec1(-2.0), vec1(-1.0), vec1(1.0), vec1(2.0)}});
  RandomVariable call({0.0, 0.0, 1.0, 2.0});
  Eigen::VectorXd price(1);
  price[0] = 0.5;
  OptionFamilyResult result = option_price_family(stock.tree, stock.models[0], {call}, price, 2);
  REQUIRE(result.family.models.size() == 2);
  for (std::size_t i = 0; i < result.family.models.size(); ++i) {
    CHECK(verify_martingale(stock.t(), result.family.models[i], result.measures[i]).martingale);
    CHECK_THAT(result.family.models[i].initial[0], WithinAbs(0.5, 1e-9));
    CHECK(result.measures[i].equivalent());
  }

  // price outside the arbitrage-free interval
  price[0] = 3.0;
  CHECK_THROWS_AS(option_price_family(stock.tree, stock.models[0], {call}, price, 1),
                  NoConsistentPricingMeasure);

  // arbitrage in the stock is rejected outright
  ModelFamily bad = one_step_family({{vec1(1.0), vec1(2.0)}});
  price[0] = 1.5;
  CHECK_THROWS_AS(
      option_price_family(bad.tree, bad.models[0], {RandomVariable({1.0, 2.0})}, price, 1),
      ArbitrageInStockModel);
}

TEST_CASE("trinomial with two compatible payoffs collapses to one measure") {
  ModelFamily stock = one_step_family({{vec1(-1.0), vec1(0.0), vec1(1.0)}});
  RandomVariable call({0.0, 0.0, 1.0});
  RandomVariable digital({0.0, 1.0, 1.0});
  Eigen::VectorXd prices(2);
  prices << 0.25, 0.75;  // both priced by q = (1/4, 1/2, 1/4)
  OptionFamilyResult result =
      option_price_family(stock.tree, stock.models[0], {call, digital}, prices, 2);
  CHECK(result.family.models.size() == 1);
  CHECK(result.family.assets == 2);
}

TEST_CASE("hypothesis report on the gap family") {
  ModelFamily gap = terminal_gap_family(20.0, 9);
  HypothesisReport r = hypothesis_report(gap, UtilitySpec::capped_sqrt(2.0), 1.0,
                                         AdmissibilityMode::Intermediate);
  CHECK(r.bounded_halfline);
  CHECK(r.sublinear_halfline);
  CHECK_FALSE(r.bounded_wholeline);
  CHECK_FALSE(r.sublinear_wholeline);  // Sbar and Stilde fail no-arbitrage
}

TEST_CASE("hypothesis report on the two drift family") {
  ModelFamily family = two_drift_family();
  HypothesisReport r = hypothesis_report(family, UtilitySpec::power(0.5), 1.0,
                                         AdmissibilityMode::Unconstrained);
  // every member is arbitrage-free and non-redundant, growth is sublinear;
  // only the domain flag separates the half-line and whole-line variants
  bool all_star = false;
  for (const auto& c : r.conditions)
    if (c.name == "every model qualifies as a reference") all_star = c.holds;
  CHECK(all_star);
  CHECK(r.max_inv_beta > 0.0);
  CHECK(r.max_increment_norm >= 1.0);

  HypothesisReport ne = hypothesis_report(family, UtilitySpec::neg_exp(1.0), 1.0,
                                          AdmissibilityMode::Unconstrained);
  CHECK(ne.bounded_wholeline);
  CHECK(ne.sublinear_wholeline);
}

TEST_CASE("hypothesis report rejects unbounded utility when a model has arbitrage") {
  ModelFamily gap = terminal_gap_family(20.0, 9);
  HypothesisReport r = hypothesis_report(gap, UtilitySpec::power(0.5), 1.0,
                                         AdmissibilityMode::Unconstrained);
  CHECK_FALSE(r.sublinear_wholeline);
}
