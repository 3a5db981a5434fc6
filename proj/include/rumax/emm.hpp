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
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/simplex.hpp"
#include "rumax/tree.hpp"

namespace rumax {

// An equivalent martingale measure for one price model, together with the
// bound K* on its density against the reference measure.
struct EMMResult {
  Measure measure;
  double density_bound = 0.0;  // max over leaves of dQ/dP
  std::string model;
};

struct MartingaleReport {
  bool martingale = false;
  double max_drift = 0.0;  // max over nodes of |E_q[dS | node]|
};

// Conditional drift check under q: at every internal node the q-conditional
// expectation of the next increment must vanish within the tolerance.
inline MartingaleReport verify_martingale(const FilteredTree& tree, const PriceModel& model,
                                          const Measure& q, double tol = 1e-9) {
  if (q.size() != tree.leaf_count()) throw SizeMismatch("measure size");
  if (!q.equivalent()) throw BaseNotFullSupport("measure must have full support");

  // q-mass of every subtree
  std::vector<double> mass(tree.node_count(), 0.0);
  for (int leaf : tree.leaves()) mass[leaf] = q.weights[tree.node(leaf).leaf_index];
  for (int id = tree.node_count() - 1; id >= 0; --id)
    for (int c : tree.node(id).children) mass[id] += mass[c];

  MartingaleReport report;
  for (int t = 1; t <= tree.horizon(); ++t) {
    for (int id : tree.nodes_at_depth(t - 1)) {
      Eigen::VectorXd drift = Eigen::VectorXd::Zero(model.dim());
      for (int c : tree.node(id).children) drift += mass[c] * model.increment(c);
      drift /= mass[id];
      report.max_drift = std::max(report.max_drift, drift.norm());
    }
  }
  report.martingale = report.max_drift <= tol;
  return report;
}

// Desk-scale martingale measure construction by LP: maximise the smallest
// leaf weight relative to the reference measure subject to unit mass and
// zero conditional drift at every internal node. A positive optimum
// certifies equivalence; a non-positive or infeasible program certifies
// arbitrage, which is the converse direction of the fundamental theorem at
// finite scale.
inline EMMResult find_emm(const FilteredTree& tree, const PriceModel& model) {
  const int leaves = tree.leaf_count();
  const double inf = std::numeric_limits<double>::infinity();

  // variables: q_0..q_{L-1}, then delta
  std::vector<double> objective(leaves + 1, 0.0), lower(leaves + 1, 0.0), upper(leaves + 1, inf);
  objective[leaves] = 1.0;
  lower[leaves] = -inf;
  upper[leaves] = 1.0;
  DenseSimplex lp(objective, lower, upper);

  {
    LpRow norm;
    norm.sense = 'E';
    norm.rhs = 1.0;
    for (int i = 0; i < leaves; ++i) norm.terms.emplace_back(i, 1.0);
    lp.add_row(norm);
  }
  for (int t = 1; t <= tree.horizon(); ++t) {
    for (int id : tree.nodes_at_depth(t - 1)) {
      for (int k = 0; k < model.dim(); ++k) {
        LpRow row;
        row.sense = 'E';
        row.rhs = 0.0;
        for (int c : tree.node(id).children) {
          double a = model.increment(c)[k];
          if (a == 0.0) continue;
          auto [lo, hi] = tree.leaf_range(c);
          for (int leaf = lo; leaf < hi; ++leaf) row.terms.emplace_back(leaf, a);
        }
        if (!row.terms.empty()) lp.add_row(row);
      }
    }
  }
  Measure ref = Measure::reference(tree);
  for (int i = 0; i < leaves; ++i) {
    LpRow row;  // q_i - delta * P_i >= 0
    row.sense = 'G';
    row.rhs = 0.0;
    row.terms.emplace_back(i, 1.0);
    row.terms.emplace_back(leaves, -ref.weights[i]);
    lp.add_row(row);
  }

  LpStatus status = lp.solve();
  if (status == LpStatus::Infeasible) throw ArbitrageInModel(model.name);
  if (status != LpStatus::Optimal)
    throw NumericFailure("martingale measure LP did not reach an optimum");
  if (lp.objective_value() <= 1e-11) throw ArbitrageInModel(model.name);

  std::vector<double> x = lp.solution();
  std::vector<double> weights(x.begin(), x.begin() + leaves);
  double sum = 0.0;
  for (double w : weights) sum += w;
  for (double& w : weights) w /= sum;  // remove the LP's last-digit slack

  EMMResult result;
  result.measure = Measure(std::move(weights));
  result.model = model.name;
  result.density_bound = 0.0;
  for (int i = 0; i < leaves; ++i)
    result.density_bound = std::max(result.density_bound,
                                    result.measure.weights[i] / ref.weights[i]);
  return result;
}

// Unique martingale measure of the additive binary model with volatility
// sigma and drift mu on the 2^T-leaf tree (children ordered up, down):
// weight 2^{-T} prod_t (1 - sign_t mu/sigma).
inline Measure bachelier_emm_closed_form(int T, double sigma, double mu) {
  if (T < 1 || !(sigma > 0.0)) throw BadParameters("need T >= 1 and sigma > 0");
  if (!(std::abs(mu) < sigma))
    throw DriftDominatesVolatility("mu " + std::to_string(mu) + " vs sigma " +
                                   std::to_string(sigma));
  const double ratio = mu / sigma;
  const int leaves = 1 << T;
  std::vector<double> w(leaves);
  for (int leaf = 0; leaf < leaves; ++leaf) {
    double v = std::pow(0.5, T);
    for (int t = 0; t < T; ++t) {
      // canonical order: the up child comes first, so bit (T-1-t) == 0 is up
      int sign = ((leaf >> (T - 1 - t)) & 1) == 0 ? 1 : -1;
      v *= 1.0 - sign * ratio;
    }
    w[leaf] = v;
  }
  return Measure(std::move(w));
}

// Per-leaf density dq/dp.
inline RandomVariable density(const Measure& q, const Measure& p) {
  if (q.size() != p.size()) throw SizeMismatch("density needs equal sizes");
  if (!p.equivalent()) throw BaseNotFullSupport("base measure must have full support");
  std::vector<double> out(q.size());
  for (int i = 0; i < q.size(); ++i) out[i] = q.weights[i] / p.weights[i];
  return RandomVariable(std::move(out));
}

}  // namespace rumax
