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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rumax/arbitrage.hpp"
#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/simplex.hpp"
#include "rumax/tree.hpp"
#include "rumax/utility.hpp"

namespace rumax {

// Which strategies are admissible: non-negative wealth at all dates under
// every model, non-negative terminal wealth under every model, or no
// constraint at all (whole-line utilities; ruinous strategies exclude
// themselves through value -infinity).
enum class AdmissibilityMode { Intermediate, TerminalOnly, Unconstrained };

inline const char* to_string(AdmissibilityMode mode) {
  switch (mode) {
    case AdmissibilityMode::Intermediate: return "intermediate";
    case AdmissibilityMode::TerminalOnly: return "terminal";
    case AdmissibilityMode::Unconstrained: return "unconstrained";
  }
  return "?";
}

struct RobustSolution {
  Strategy strategy;
  double value = 0.0;
  std::vector<std::string> worst_models;
  enum class Method { LP, Supergradient } method = Method::LP;
  double gap_bound = 0.0;   // certified distance to the exact optimum
  bool box_active = false;  // optimum touches the artificial position box
};

namespace detail {

// Linear form of the trading gain at `node` over flat strategy coordinates.
inline std::vector<std::pair<int, double>> gain_terms(const FilteredTree& tree,
                                                      const PriceModel& model, int node_id,
                                                      const StrategyLayout& layout) {
  std::vector<std::pair<int, double>> terms;
  for (int id : tree.path_to(node_id)) {
    const auto& n = tree.node(id);
    if (n.parent < 0) continue;
    for (int k = 0; k < layout.d; ++k) {
      double a = model.increment(id)[k];
      if (a != 0.0) terms.emplace_back(layout.coord(tree, n.depth, n.parent, k), a);
    }
  }
  std::sort(terms.begin(), terms.end());
  return terms;
}

inline double eval_terms(const std::vector<std::pair<int, double>>& terms,
                         const std::vector<double>& x) {
  double acc = 0.0;
  for (const auto& [j, a] : terms) acc += a * x[j];
  return acc;
}

}  // namespace detail

// The linear inequalities w0 + gain >= 0 defining an admissibility mode,
// deduplicated: wide fan-outs produce many identical wealth expressions.
struct ConstraintSystem {
  StrategyLayout layout;
  // each row: gain terms, constraint is  w0 + <terms, phi> >= 0
  std::vector<std::vector<std::pair<int, double>>> rows;
  double w0 = 0.0;

  bool feasible(const std::vector<double>& x, double tol = 1e-9) const {
    for (const auto& r : rows)
      if (w0 + detail::eval_terms(r, x) < -tol) return false;
    return true;
  }
};

inline ConstraintSystem constraint_system(const ModelFamily& family, double w0,
                                          AdmissibilityMode mode) {
  const FilteredTree& tree = family.t();
  ConstraintSystem sys;
  sys.layout = StrategyLayout(tree, family.assets);
  sys.w0 = w0;
  if (mode == AdmissibilityMode::Unconstrained) return sys;

  std::map<std::vector<std::pair<int, double>>, bool> seen;
  for (const PriceModel& model : family.models) {
    const int first_depth = mode == AdmissibilityMode::TerminalOnly ? tree.horizon() : 1;
    for (int t = first_depth; t <= tree.horizon(); ++t) {
      for (int id : tree.nodes_at_depth(t)) {
        auto terms = detail::gain_terms(tree, model, id, sys.layout);
        if (seen.emplace(terms, true).second) sys.rows.push_back(std::move(terms));
      }
    }
  }
  return sys;
}

// inf over models of E[U(terminal wealth)]; -infinity propagates eagerly.
inline double evaluate_robust(const Strategy& phi, const ModelFamily& family,
                              const UtilitySpec& u, double w0) {
  const FilteredTree& tree = family.t();
  double worst = kPosInf;
  for (const PriceModel& model : family.models) {
    RandomVariable wealth = terminal_wealth(tree, model, w0, phi);
    double acc = 0.0;
    for (int leaf : tree.leaves()) {
      double ux = u(wealth.values[tree.node(leaf).leaf_index]);
      if (ux == kNegInf) {
        acc = kNegInf;
        break;
      }
      acc += tree.node(leaf).path_prob * ux;
    }
    worst = std::min(worst, acc);
  }
  return worst;
}

inline std::vector<std::string> worst_models_at(const Strategy& phi, const ModelFamily& family,
                                                const UtilitySpec& u, double w0,
                                                double tol = 1e-9) {
  const FilteredTree& tree = family.t();
  std::vector<double> values;
  double worst = kPosInf;
  for (const PriceModel& model : family.models) {
    RandomVariable wealth = terminal_wealth(tree, model, w0, phi);
    double acc = 0.0;
    for (int leaf : tree.leaves()) {
      double ux = u(wealth.values[tree.node(leaf).leaf_index]);
      if (ux == kNegInf) {
        acc = kNegInf;
        break;
      }
      acc += tree.node(leaf).path_prob * ux;
    }
    values.push_back(acc);
    worst = std::min(worst, acc);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] <= worst + tol) out.push_back(family.models[i].name);
  return out;
}

struct SolveOptions {
  double box = 1e4;       // |phi|_inf bound; binding at the optimum is reported
  double tol = 1e-9;
  int max_rounds = 400;   // lazy-activation rounds
  long iteration_limit = -1;
  int warm_start_iters = 120;  // supergradient steps seeding the cut loop; 0 disables
};

inline RobustSolution solve_lp(const ModelFamily& family, const UtilitySpec& pl, double w0,
                               AdmissibilityMode mode, const SolveOptions& opts = {});

struct SupergradientOptions {
  int iters = 400;
  double step0 = 0.5;
  double box = 1e4;
  double gap_tol = 1e-4;      // PL refinement target for the certificate
  bool compute_gap = true;
  int dykstra_sweeps = 200;
  double dykstra_tol = 1e-10;
};

inline RobustSolution solve_supergradient(const ModelFamily& family, const UtilitySpec& u,
                                          double w0, AdmissibilityMode mode,
                                          const SupergradientOptions& opts = {});

// Exact robust utility maximisation for concave piecewise-linear utilities:
//
//   maximise  tau
//   s.t.      tau <= sum_omega P(omega) u_{S,omega}          per model S
//             u_{S,omega} <= a_k W_T^S(omega) + b_k          per PL piece k
//             admissibility rows of the chosen mode
//
// Concavity of the utility makes the reformulation exact, not a
// relaxation. Identical wealth expressions within a model are merged (wide
// fan-outs collapse dramatically). The PL piece rows and the admissibility
// rows are activated lazily: the program starts from a warm point, violated
// rows are appended after each solve, and termination with no violations is
// optimality for the full program. A short projected-supergradient run
// seeds the warm point so the initial active pieces are already the
// decisive ones; zero-slope pieces are upper bounds on u and never need a
// row.
inline RobustSolution solve_lp(const ModelFamily& family, const UtilitySpec& pl, double w0,
                               AdmissibilityMode mode, const SolveOptions& opts) {
  if (pl.kind() != UtilitySpec::Kind::PiecewiseLinear)
    throw BadUtilitySpec("the exact solver needs a piecewise-linear utility");
  const FilteredTree& tree = family.t();
  StrategyLayout layout(tree, family.assets);

  // wealth groups per model
  struct Group {
    std::vector<std::pair<int, double>> terms;
    double prob = 0.0;
  };
  std::vector<std::vector<Group>> groups(family.models.size());
  for (std::size_t s = 0; s < family.models.size(); ++s) {
    std::map<std::vector<std::pair<int, double>>, std::size_t> index;
    for (int leaf : tree.leaves()) {
      auto terms = detail::gain_terms(tree, family.models[s], leaf, layout);
      auto [it, fresh] = index.emplace(std::move(terms), groups[s].size());
      if (fresh) groups[s].push_back({it->first, 0.0});
      groups[s][it->second].prob += tree.node(leaf).path_prob;
    }
  }

  // columns: strategy coordinates, then one u per (model, group), then tau
  int n_groups = 0;
  for (const auto& g : groups) n_groups += static_cast<int>(g.size());
  const int u_base = layout.total;
  const int tau_col = u_base + n_groups;
  const double inf = kPosInf;

  std::vector<double> objective(tau_col + 1, 0.0);
  objective[tau_col] = 1.0;
  std::vector<double> lower(tau_col + 1, -inf), upper(tau_col + 1, inf);
  for (int j = 0; j < layout.total; ++j) {
    lower[j] = -opts.box;
    upper[j] = opts.box;
  }
  const double u_cap = pl.bounded_above() ? pl.upper_bound() : inf;
  for (int j = u_base; j <= tau_col; ++j) upper[j] = u_cap;

  // distinct affine pieces a x + b; a zero-slope piece equals the upper
  // bound already present on every u column
  std::vector<std::pair<double, double>> pieces;
  {
    const auto& pts = pl.breakpoints();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      double a = (pts[k + 1].second - pts[k].second) / (pts[k + 1].first - pts[k].first);
      double b = pts[k].second - a * pts[k].first;
      bool dup = false;
      for (const auto& [pa, pb] : pieces) dup = dup || (pa == a && pb == b);
      if (!dup) pieces.emplace_back(a, b);
    }
  }
  const int n_pieces = static_cast<int>(pieces.size());
  auto active_piece = [&](double x) {
    int best = 0;
    double best_v = kPosInf;
    for (int k = 0; k < n_pieces; ++k) {
      double v = pieces[k].first * x + pieces[k].second;
      if (v < best_v - 1e-15) {
        best_v = v;
        best = k;
      }
    }
    return best;
  };

  ConstraintSystem adm = constraint_system(family, w0, mode);

  // warm point: a cheap projected-supergradient run on larger instances
  std::vector<double> start(layout.total, 0.0);
  if (opts.warm_start_iters > 0 && layout.total > 8) {
    try {
      SupergradientOptions warm;
      warm.iters = opts.warm_start_iters;
      warm.box = opts.box;
      warm.compute_gap = false;
      RobustSolution guess = solve_supergradient(family, pl, w0, mode, warm);
      start = layout.pack(tree, guess.strategy);
    } catch (const Error&) {
      std::fill(start.begin(), start.end(), 0.0);
    }
    if (!adm.feasible(start, 1e-12)) std::fill(start.begin(), start.end(), 0.0);
  }

  DenseSimplex lp(objective, lower, upper);
  for (int j = 0; j < layout.total; ++j) lp.pin(j, start[j]);

  std::vector<int> group_col(n_groups);
  std::vector<double> start_wealth(n_groups);
  {
    int col = u_base, flat = 0;
    double worst = kPosInf;
    for (std::size_t s = 0; s < groups.size(); ++s) {
      LpRow model_row;  // tau - sum p_g u_g <= 0
      model_row.sense = 'L';
      model_row.rhs = 0.0;
      model_row.terms.emplace_back(tau_col, 1.0);
      double acc = 0.0;
      for (std::size_t g = 0; g < groups[s].size(); ++g, ++col, ++flat) {
        group_col[flat] = col;
        start_wealth[flat] = w0 + detail::eval_terms(groups[s][g].terms, start);
        model_row.terms.emplace_back(col, -groups[s][g].prob);
        lp.pin(col, pl(start_wealth[flat]));
        acc += groups[s][g].prob * pl(start_wealth[flat]);
      }
      lp.add_row(model_row);
      worst = std::min(worst, acc);
    }
    lp.pin(tau_col, worst);
  }

  std::vector<std::vector<char>> piece_active(n_groups, std::vector<char>(n_pieces, 0));
  auto add_piece_row = [&](int flat_group, const Group& grp, int k) {
    if (piece_active[flat_group][k]) return -1;
    piece_active[flat_group][k] = 1;
    auto [a, b] = pieces[k];
    if (a == 0.0) return -1;  // subsumed by the u upper bound
    LpRow row;  // u - a * gain <= a w0 + b
    row.sense = 'L';
    row.rhs = a * w0 + b;
    row.terms.emplace_back(group_col[flat_group], 1.0);
    for (const auto& [j, coef] : grp.terms)
      if (a * coef != 0.0) row.terms.emplace_back(j, -a * coef);
    return lp.add_row(row);
  };

  std::vector<char> adm_active(adm.rows.size(), 0);
  auto add_adm_row = [&](std::size_t i) {
    if (adm_active[i]) return false;
    adm_active[i] = 1;
    LpRow row;  // gain >= -w0
    row.sense = 'G';
    row.rhs = -w0;
    row.terms = adm.rows[i];
    lp.add_row(row);
    return true;
  };

  // activate the pieces supporting the warm point, with each u basic in its
  // piece row so the simplex does not spend a pass walking them in
  {
    int flat = 0;
    for (std::size_t s = 0; s < groups.size(); ++s)
      for (std::size_t g = 0; g < groups[s].size(); ++g, ++flat) {
        int row = add_piece_row(flat, groups[s][g], active_piece(start_wealth[flat]));
        if (row >= 0) lp.request_basis(row, group_col[flat]);
      }
  }
  // admissibility rows binding near the warm point join immediately; the
  // rest are activated on demand
  for (std::size_t i = 0; i < adm.rows.size(); ++i)
    if (w0 + detail::eval_terms(adm.rows[i], start) < 0.05 * (1.0 + std::abs(w0)))
      add_adm_row(i);

  int round = 0;
  std::vector<double> x;
  while (true) {
    if (++round > opts.max_rounds)
      throw NumericFailure("lazy row activation did not settle");
    LpStatus status = lp.solve(opts.iteration_limit);
#ifdef RUMAX_LP_STATS
    std::fprintf(stderr, "[lp] round %d rows %d cols %d iters %ld (p1 %ld p2 %ld)\n", round,
                 lp.row_count(), lp.num_cols(), lp.total_iterations(),
                 lp.phase1_iterations(), lp.phase2_iterations());
    std::fprintf(stderr, "[lp]   elim cells %.3g\n", (double)lp.elim_cells());
#endif
    if (status == LpStatus::Infeasible) throw Infeasible("no admissible strategy");
    if (status == LpStatus::Unbounded) throw Unbounded("robust value grows without bound");
    if (status != LpStatus::Optimal) throw NumericFailure("simplex iteration limit");

    x = lp.solution();
    bool added = false;
    int flat = 0;
    for (std::size_t s = 0; s < groups.size(); ++s) {
      for (std::size_t g = 0; g < groups[s].size(); ++g, ++flat) {
        double wealth = w0 + detail::eval_terms(groups[s][g].terms, x);
        if (x[group_col[flat]] > pl(wealth) + 1e-10)
          added |= add_piece_row(flat, groups[s][g], active_piece(wealth)) >= 0;
      }
    }
    for (std::size_t i = 0; i < adm.rows.size(); ++i)
      if (w0 + detail::eval_terms(adm.rows[i], x) < -1e-10) added |= add_adm_row(i);
    if (!added) break;
  }

  // The solver honours the admissibility rows to its feasibility tolerance,
  // so wealth may undershoot a domain boundary by a rounding margin; value
  // reporting treats such leaves as sitting exactly on the boundary.
  RobustSolution out;
  out.method = RobustSolution::Method::LP;
  out.strategy = layout.unpack(tree, std::vector<double>(x.begin(), x.begin() + layout.total));
  out.value = kPosInf;
  std::vector<double> model_values;
  {
    int flat = 0;
    for (std::size_t s = 0; s < groups.size(); ++s) {
      double acc = 0.0;
      for (std::size_t g = 0; g < groups[s].size(); ++g, ++flat) {
        double wealth = w0 + detail::eval_terms(groups[s][g].terms, x);
        if (wealth < 0.0 && wealth >= -1e-7) wealth = 0.0;
        double ux = pl(wealth);
        acc = (ux == kNegInf || acc == kNegInf) ? kNegInf : acc + groups[s][g].prob * ux;
      }
      model_values.push_back(acc);
      out.value = std::min(out.value, acc);
    }
  }
  for (std::size_t s = 0; s < model_values.size(); ++s)
    if (model_values[s] <= out.value + opts.tol)
      out.worst_models.push_back(family.models[s].name);
  out.gap_bound = 0.0;
  for (int j = 0; j < layout.total; ++j)
    if (std::abs(x[j]) >= opts.box - 1e-7) out.box_active = true;
  return out;
}

namespace detail {

// Dykstra's alternating projections onto the intersection of half-spaces
// {w0 + <a_i, x> >= 0} and the box.
inline void project_feasible(std::vector<double>* x, const ConstraintSystem& sys, double box,
                             int sweeps, double tol) {
  const std::size_t m = sys.rows.size();
  std::vector<std::vector<double>> corrections(m);
  std::vector<double> norms(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [j, a] : sys.rows[i]) norms[i] += a * a;
    corrections[i].assign(sys.rows[i].size(), 0.0);
  }
  std::vector<double> box_correction(x->size(), 0.0);

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (norms[i] == 0.0) continue;
      // add back this constraint's correction
      std::size_t idx = 0;
      for (const auto& [j, a] : sys.rows[i]) {
        (void)a;
        (*x)[j] += corrections[i][idx++];
      }
      double slack = sys.w0 + eval_terms(sys.rows[i], *x);
      double move = slack < 0.0 ? -slack / norms[i] : 0.0;
      idx = 0;
      for (const auto& [j, a] : sys.rows[i]) {
        double nx = (*x)[j] + move * a;
        corrections[i][idx] = -move * a;
        change = std::max(change, std::abs(move * a));
        (*x)[j] = nx;
        ++idx;
      }
    }
    for (std::size_t j = 0; j < x->size(); ++j) {
      (*x)[j] += box_correction[j];
      double clipped = std::clamp((*x)[j], -box, box);
      box_correction[j] = (*x)[j] - clipped;
      change = std::max(change, std::abs(box_correction[j]));
      (*x)[j] = clipped;
    }
    if (change <= tol) break;
  }
}

}  // namespace detail

// Projected supergradient ascent on the concave map
// phi -> min_S E[U(W_T^S(w0, phi))], with diminishing steps step0/sqrt(k)
// and a certified optimality gap against the exact solver on a refined
// chord approximation of U.
inline RobustSolution solve_supergradient(const ModelFamily& family, const UtilitySpec& u,
                                          double w0, AdmissibilityMode mode,
                                          const SupergradientOptions& opts) {
  if (opts.iters < 1) throw BadParameters("iters >= 1");
  const FilteredTree& tree = family.t();
  StrategyLayout layout(tree, family.assets);
  ConstraintSystem sys = constraint_system(family, w0, mode);

  std::vector<double> x(layout.total, 0.0);
  if (!sys.feasible(x) || !std::isfinite(u(w0)))
    throw DomainViolationAtStart("the safe portfolio must be feasible with finite utility");

  Strategy best = layout.unpack(tree, x);
  double best_value = evaluate_robust(best, family, u, w0);

  const double wealth_floor = 1e-9 * (1.0 + std::abs(w0));
  for (int k = 1; k <= opts.iters; ++k) {
    // argmin model at the current iterate (first index on ties)
    Strategy phi = layout.unpack(tree, x);
    int argmin = 0;
    double worst = kPosInf;
    std::vector<RandomVariable> wealths;
    for (std::size_t s = 0; s < family.models.size(); ++s) {
      wealths.push_back(terminal_wealth(tree, family.models[s], w0, phi));
      double acc = 0.0;
      for (int leaf : tree.leaves()) {
        double ux = u(wealths[s].values[tree.node(leaf).leaf_index]);
        acc += tree.node(leaf).path_prob * (ux == kNegInf ? -1e30 : ux);
      }
      if (acc < worst - 1e-15) {
        worst = acc;
        argmin = static_cast<int>(s);
      }
    }

    // supergradient of the argmin model's expected utility
    std::vector<double> grad(layout.total, 0.0);
    const PriceModel& model = family.models[argmin];
    for (int leaf : tree.leaves()) {
      double wl = wealths[argmin].values[tree.node(leaf).leaf_index];
      if (u.domain() == UtilityDomain::Positive) wl = std::max(wl, wealth_floor);
      double slope = u.supergradient(wl) * tree.node(leaf).path_prob;
      for (int id : tree.path_to(leaf)) {
        const auto& n = tree.node(id);
        if (n.parent < 0) continue;
        for (int c = 0; c < layout.d; ++c)
          grad[layout.coord(tree, n.depth, n.parent, c)] += slope * model.increment(id)[c];
      }
    }

    double step = opts.step0 / std::sqrt(static_cast<double>(k));
    for (int j = 0; j < layout.total; ++j) x[j] += step * grad[j];
    detail::project_feasible(&x, sys, opts.box, opts.dykstra_sweeps, opts.dykstra_tol);

    Strategy candidate = layout.unpack(tree, x);
    double value = evaluate_robust(candidate, family, u, w0);
    if (value > best_value) {
      best_value = value;
      best = candidate;
    }
  }

  // golden-section polish, one coordinate at a time: the restriction of the
  // robust objective to a line is concave, so each sweep is an exact search
  // over the coordinate's feasible interval
  {
    x = layout.pack(tree, best);
    const double gr = 0.6180339887498949;
    for (int sweep = 0; sweep < 3; ++sweep) {
      double improved = 0.0;
      for (int j = 0; j < layout.total; ++j) {
        double lo = -opts.box, hi = opts.box;
        for (const auto& row : sys.rows) {
          double aj = 0.0, rest = w0;
          for (const auto& [col, a] : row)
            if (col == j) aj = a; else rest += a * x[col];
          if (aj > 1e-14) lo = std::max(lo, -rest / aj);
          else if (aj < -1e-14) hi = std::min(hi, -rest / aj);
        }
        if (!(lo < hi)) continue;
        auto value_at = [&](double v) {
          double keep = x[j];
          x[j] = v;
          double out_v = evaluate_robust(layout.unpack(tree, x), family, u, w0);
          x[j] = keep;
          return out_v;
        };
        double a = lo, b = hi;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = value_at(c), fd = value_at(d);
        for (int it = 0; it < 60 && b - a > 1e-11 * (1.0 + std::abs(a)); ++it) {
          if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = value_at(c);
          } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = value_at(d);
          }
        }
        double candidate = 0.5 * (a + b);
        double fv = value_at(candidate);
        if (fv > best_value) {
          improved += fv - best_value;
          best_value = fv;
          x[j] = candidate;
        }
      }
      if (improved <= 1e-12) break;
    }
    best = layout.unpack(tree, x);
  }

  RobustSolution out;
  out.method = RobustSolution::Method::Supergradient;
  out.strategy = best;
  out.value = best_value;
  out.worst_models = worst_models_at(best, family, u, w0);

  if (opts.compute_gap) {
    // refine a chord approximation until its gap is below target, solve the
    // exact program on it, and report the certified sandwich width
    double max_step = 0.0;
    for (int t = 1; t <= tree.horizon(); ++t) {
      double biggest = 0.0;
      for (int id : tree.nodes_at_depth(t))
        for (const PriceModel& m : family.models)
          biggest = std::max(biggest, m.increment(id).lpNorm<1>());
      max_step += biggest;
    }
    double lo = w0 - opts.box * max_step, hi = w0 + opts.box * max_step;
    bool clamped = false;
    if (u.domain() == UtilityDomain::Positive) {
      lo = std::min(1e-6, std::abs(w0) * 0.5 + 1e-9);
      if (!std::isfinite(u(lo))) lo = 1e-6;
    } else {
      while (u(lo) < -1e15 && lo < hi) {
        lo = w0 + (lo - w0) * 0.5;
        clamped = true;
      }
    }

    // initial grid: linear everywhere plus geometric clustering toward the
    // lower end, where the curvature of half-line utilities concentrates
    std::vector<double> points;
    for (int i = 0; i <= 32; ++i) points.push_back(lo + (hi - lo) * i / 32.0);
    if (lo > 0.0)
      for (int i = 0; i <= 32; ++i)
        points.push_back(lo * std::pow(hi / lo, i / 32.0));
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 points.end());

    PlApproximation approx = pl_under_approximation(u, points);
    for (int refine = 0;
         refine < 48 && approx.max_gap > opts.gap_tol && points.size() < 8192; ++refine) {
      std::vector<double> finer;
      finer.reserve(points.size() * 2);
      for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        finer.push_back(points[i]);
        double mid = 0.5 * (points[i] + points[i + 1]);
        double gap = u(mid) - 0.5 * (u(points[i]) + u(points[i + 1]));
        if (gap > 0.25 * opts.gap_tol && mid - points[i] > 1e-12) finer.push_back(mid);
      }
      finer.push_back(points.back());
      if (finer.size() == points.size()) break;
      points = std::move(finer);
      approx = pl_under_approximation(u, points);
    }

    SolveOptions lp_opts;
    lp_opts.box = opts.box;
    RobustSolution exact = solve_lp(family, approx.pl, w0, mode, lp_opts);
    out.box_active = exact.box_active;
    if (clamped) {
      out.gap_bound = kPosInf;  // chords over-approximate beyond the clamp
    } else {
      out.gap_bound = std::max(0.0, exact.value + approx.max_gap - best_value);
    }
  }
  return out;
}

// Exhaustive grid oracle over the admissible box; the independent check the
// exact solver is validated against. Deliberately simple and only usable
// when the strategy has at most six coordinates.
inline double brute_force_oracle(const ModelFamily& family, const UtilitySpec& u, double w0,
                                 AdmissibilityMode mode, double grid_radius, int grid_steps) {
  const FilteredTree& tree = family.t();
  StrategyLayout layout(tree, family.assets);
  if (layout.total > 6)
    throw TooManyDimensions(std::to_string(layout.total) + " strategy coordinates");
  ConstraintSystem sys = constraint_system(family, w0, mode);

  std::vector<int> idx(layout.total, 0);
  std::vector<double> x(layout.total, 0.0);
  double best = kNegInf;
  while (true) {
    for (int j = 0; j < layout.total; ++j)
      x[j] = -grid_radius + 2.0 * grid_radius * idx[j] / (grid_steps - 1);
    if (sys.feasible(x)) {
      double v = evaluate_robust(layout.unpack(tree, x), family, u, w0);
      best = std::max(best, v);
    }
    int j = 0;
    while (j < layout.total && ++idx[j] >= grid_steps) idx[j++] = 0;
    if (j == layout.total) break;
  }
  return best;
}

}  // namespace rumax
