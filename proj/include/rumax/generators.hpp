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

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rumax/arbitrage.hpp"
#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/simplex.hpp"
#include "rumax/tree.hpp"

namespace rumax {

namespace detail {
inline Eigen::VectorXd scalar_vec(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}
}  // namespace detail

// Additive binary models S_t = s0 + sum (sigma * sign_s + mu) on the
// 2^T-leaf tree with up probability p. One model per (sigma, mu) pair, all
// on the same tree.
inline ModelFamily bachelier_family(int T, double p, double s0,
                                    const std::vector<std::pair<double, double>>& thetas) {
  if (T < 1 || !(p > 0.0 && p < 1.0) || thetas.empty())
    throw BadParameters("bachelier family needs T >= 1, p in (0,1), >= 1 theta");
  for (auto [sigma, mu] : thetas) {
    (void)mu;
    if (!(sigma > 0.0)) throw BadParameters("sigma must be positive");
  }

  std::function<TreeSpec(int)> grow = [&](int depth) {
    TreeSpec node;
    if (depth < T) {
      TreeSpec up = grow(depth + 1);
      up.prob = p;
      up.label = "u";
      TreeSpec down = grow(depth + 1);
      down.prob = 1.0 - p;
      down.label = "d";
      node.children = {up, down};
    }
    return node;
  };
  TreePtr tree = make_tree(grow(0));

  ModelFamily family;
  family.tree = tree;
  family.assets = 1;
  for (auto [sigma, mu] : thetas) {
    PriceModel m;
    m.name = "sigma=" + std::to_string(sigma) + ",mu=" + std::to_string(mu);
    m.initial = detail::scalar_vec(s0);
    m.increments.resize(tree->node_count(), Eigen::VectorXd());
    for (int id = 1; id < tree->node_count(); ++id) {
      double sign = tree->node(id).label == "u" ? 1.0 : -1.0;
      m.increments[id] = detail::scalar_vec(sigma * sign + mu);
    }
    family.models.push_back(std::move(m));
  }
  family.validate();
  return family;
}

// Two-period, three-model family in which a strategy can be admissible
// under the terminal-wealth rule yet inadmissible under the running
// non-negativity rule. The first branching jointly realises a uniform grid
// value X on [-M, M] (n points, n odd, endpoints included) and a first
// shock from {-1/2, 4}; the second branching realises a shock from
// {-1/2, 1/2}. Models:
//   Sstar:  dS_1 = shock1,  dS_2 = shock2
//   Stilde: dS_1 = X,       dS_2 = 3 - X
//   Sbar:   dS_1 = 3,       dS_2 = 0
inline ModelFamily terminal_gap_family(double M, int n) {
  if (!(M > 1.0) || n < 3 || n % 2 == 0)
    throw BadParameters("terminal gap family needs M > 1 and odd n >= 3");

  const std::vector<double> shock1 = {-0.5, 4.0};
  const std::vector<double> shock2 = {-0.5, 0.5};

  TreeSpec root;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = -M + 2.0 * M * i / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < shock1.size(); ++e) {
      TreeSpec mid;
      mid.prob = 1.0 / (2.0 * n);
      mid.label = "x" + std::to_string(i) + (e == 0 ? "a" : "b");
      for (std::size_t f = 0; f < shock2.size(); ++f) {
        TreeSpec leaf;
        leaf.prob = 0.5;
        leaf.label = f == 0 ? "d" : "u";
        mid.children.push_back(leaf);
      }
      root.children.push_back(mid);
    }
  }
  TreePtr tree = make_tree(root);

  ModelFamily family;
  family.tree = tree;
  family.assets = 1;
  PriceModel star{"Sstar", detail::scalar_vec(0.0), {}};
  PriceModel tilde{"Stilde", detail::scalar_vec(0.0), {}};
  PriceModel bar{"Sbar", detail::scalar_vec(0.0), {}};
  star.increments.resize(tree->node_count());
  tilde.increments.resize(tree->node_count());
  bar.increments.resize(tree->node_count());

  const auto& mids = tree->nodes_at_depth(1);
  for (std::size_t idx = 0; idx < mids.size(); ++idx) {
    int id = mids[idx];
    double x = xs[idx / shock1.size()];
    double e1 = shock1[idx % shock1.size()];
    star.increments[id] = detail::scalar_vec(e1);
    tilde.increments[id] = detail::scalar_vec(x);
    bar.increments[id] = detail::scalar_vec(3.0);
    for (std::size_t f = 0; f < tree->node(id).children.size(); ++f) {
      int leaf = tree->node(id).children[f];
      star.increments[leaf] = detail::scalar_vec(shock2[f]);
      tilde.increments[leaf] = detail::scalar_vec(3.0 - x);
      bar.increments[leaf] = detail::scalar_vec(0.0);
    }
  }
  family.models = {std::move(star), std::move(tilde), std::move(bar)};
  family.validate();
  return family;
}

// Two-period binary family with drift pairs (0.1, 0.3) and (0.2, 0.5) and
// unit shocks; the standard fixture for the time-consistency check.
inline ModelFamily two_drift_family() {
  TreeSpec root;
  for (int a = 0; a < 2; ++a) {
    TreeSpec mid;
    mid.prob = 0.5;
    mid.label = a == 0 ? "u" : "d";
    for (int b = 0; b < 2; ++b) {
      TreeSpec leaf;
      leaf.prob = 0.5;
      leaf.label = b == 0 ? "u" : "d";
      mid.children.push_back(leaf);
    }
    root.children.push_back(mid);
  }
  TreePtr tree = make_tree(root);

  ModelFamily family;
  family.tree = tree;
  family.assets = 1;
  const std::vector<std::pair<double, double>> drifts = {{0.1, 0.3}, {0.2, 0.5}};
  for (std::size_t i = 0; i < drifts.size(); ++i) {
    PriceModel m;
    m.name = "theta" + std::to_string(i + 1);
    m.initial = detail::scalar_vec(0.0);
    m.increments.resize(tree->node_count());
    for (int id = 1; id < tree->node_count(); ++id) {
      double mu = tree->node(id).depth == 1 ? drifts[i].first : drifts[i].second;
      double sign = tree->node(id).label == "u" ? 1.0 : -1.0;
      m.increments[id] = detail::scalar_vec(mu + sign);
    }
    family.models.push_back(std::move(m));
  }
  family.validate();
  return family;
}

struct OptionFamilyResult {
  ModelFamily family;
  std::vector<Measure> measures;  // pricing measure behind each model, same order
};

// Option-price model family: find pricing measures for a stock model that
// reproduce the observed option prices g, then let each measure's
// conditional expectation of the payoffs define one price process. Every
// generated process is a martingale under its own measure, but generally
// not under the reference measure, so the family carries genuine
// uncertainty.
inline OptionFamilyResult option_price_family(const TreePtr& tree, const PriceModel& stock,
                                              const std::vector<RandomVariable>& payoffs,
                                              const Eigen::VectorXd& prices, int k) {
  if (payoffs.empty() || prices.size() != static_cast<int>(payoffs.size()) || k < 1)
    throw BadParameters("option family needs payoffs, matching prices, k >= 1");
  for (const auto& g : payoffs)
    if (g.size() != tree->leaf_count()) throw SizeMismatch("payoff size");
  if (!na_check(*tree, stock).na) throw ArbitrageInStockModel(stock.name);

  const int leaves = tree->leaf_count();
  const int d = static_cast<int>(payoffs.size());
  const double inf = std::numeric_limits<double>::infinity();
  Measure ref = Measure::reference(*tree);

  auto base_rows = [&](DenseSimplex& lp, double min_weight_scale) {
    LpRow norm;
    norm.sense = 'E';
    norm.rhs = 1.0;
    for (int i = 0; i < leaves; ++i) norm.terms.emplace_back(i, 1.0);
    lp.add_row(norm);
    for (int t = 1; t <= tree->horizon(); ++t)
      for (int id : tree->nodes_at_depth(t - 1))
        for (int c = 0; c < stock.dim(); ++c) {
          LpRow row;
          row.sense = 'E';
          row.rhs = 0.0;
          for (int child : tree->node(id).children) {
            double a = stock.increment(child)[c];
            if (a == 0.0) continue;
            auto [lo, hi] = tree->leaf_range(child);
            for (int leaf = lo; leaf < hi; ++leaf) row.terms.emplace_back(leaf, a);
          }
          if (!row.terms.empty()) lp.add_row(row);
        }
    for (int j = 0; j < d; ++j) {
      LpRow row;
      row.sense = 'E';
      row.rhs = prices[j];
      for (int i = 0; i < leaves; ++i)
        if (payoffs[j].values[i] != 0.0) row.terms.emplace_back(i, payoffs[j].values[i]);
      lp.add_row(row);
    }
    if (min_weight_scale > 0.0)
      for (int i = 0; i < leaves; ++i) {
        LpRow row;
        row.sense = 'G';
        row.rhs = min_weight_scale * ref.weights[i];
        row.terms.emplace_back(i, 1.0);
        lp.add_row(row);
      }
  };

  // feasibility with maximal interior margin
  double delta_star = 0.0;
  {
    std::vector<double> obj(leaves + 1, 0.0), lo(leaves + 1, 0.0), hi(leaves + 1, inf);
    obj[leaves] = 1.0;
    lo[leaves] = -inf;
    hi[leaves] = 1.0;
    DenseSimplex lp(obj, lo, hi);
    base_rows(lp, 0.0);
    for (int i = 0; i < leaves; ++i) {
      LpRow row;
      row.sense = 'G';
      row.rhs = 0.0;
      row.terms.emplace_back(i, 1.0);
      row.terms.emplace_back(leaves, -ref.weights[i]);
      lp.add_row(row);
    }
    if (lp.solve() != LpStatus::Optimal || lp.objective_value() <= 1e-11)
      throw NoConsistentPricingMeasure("no equivalent pricing measure matches the prices");
    delta_star = lp.objective_value();
  }

  // sweep round-robin objectives max/min q_leaf, keep distinct measures
  std::vector<Measure> measures;
  auto push_measure = [&](const std::vector<double>& x) {
    std::vector<double> w(x.begin(), x.begin() + leaves);
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    for (const Measure& m : measures) {
      double dist = 0.0;
      for (int i = 0; i < leaves; ++i) dist = std::max(dist, std::abs(m.weights[i] - w[i]));
      if (dist <= 1e-9) return;
    }
    measures.push_back(Measure(std::move(w)));
  };

  for (int obj_idx = 0; obj_idx < 2 * leaves && static_cast<int>(measures.size()) < k;
       ++obj_idx) {
    int leaf = obj_idx / 2;
    double sign = obj_idx % 2 == 0 ? 1.0 : -1.0;
    std::vector<double> obj(leaves, 0.0), lo(leaves, 0.0), hi(leaves, inf);
    obj[leaf] = sign;
    DenseSimplex lp(obj, lo, hi);
    base_rows(lp, 0.5 * delta_star);
    if (lp.solve() != LpStatus::Optimal) continue;
    push_measure(lp.solution());
  }
  if (measures.empty())
    throw NoConsistentPricingMeasure("pricing measure sweep found no solution");

  OptionFamilyResult out;
  ModelFamily& family = out.family;
  family.tree = tree;
  family.assets = d;
  for (std::size_t idx = 0; idx < measures.size(); ++idx) {
    const Measure& q = measures[idx];
    PriceModel m;
    m.name = "Q" + std::to_string(idx + 1);
    // price process: conditional expectation of the payoffs under q
    std::vector<Eigen::VectorXd> node_price(tree->node_count(), Eigen::VectorXd::Zero(d));
    std::vector<double> mass(tree->node_count(), 0.0);
    for (int leaf : tree->leaves()) {
      int li = tree->node(leaf).leaf_index;
      mass[leaf] = q.weights[li];
      for (int j = 0; j < d; ++j) node_price[leaf][j] = payoffs[j].values[li];
    }
    for (int id = tree->node_count() - 1; id >= 0; --id) {
      const auto& n = tree->node(id);
      if (n.children.empty()) continue;
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
      for (int c : n.children) {
        mass[id] += mass[c];
        acc += mass[c] * node_price[c];
      }
      node_price[id] = acc / mass[id];
    }
    m.initial = node_price[0];
    m.increments.resize(tree->node_count());
    for (int id = 1; id < tree->node_count(); ++id)
      m.increments[id] = node_price[id] - node_price[tree->node(id).parent];
    family.models.push_back(std::move(m));
  }
  family.validate();
  out.measures = std::move(measures);
  return out;
}

}  // namespace rumax
