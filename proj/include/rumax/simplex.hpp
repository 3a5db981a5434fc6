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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rumax/errors.hpp"

namespace rumax {

// A dense, deterministic, bounded-variable tableau simplex.
//
// All the linear programs in this library are desk scale (a few thousand
// variables at most), so a full dense tableau with bit-reproducible pivoting
// beats pulling in an external solver. Pricing is Dantzig's rule with an
// automatic switch to Bland's rule after a streak of degenerate pivots,
// which keeps runs finite and deterministic. Infeasibility is resolved by a
// composite phase 1 (minimise the total bound violation of the basic
// variables) rather than artificial columns, so the same machinery restores
// feasibility after rows are added to an already-solved program.
//
// Rows may be added between solves; the solver re-optimises from the
// current basis. This is what the lazy-constraint loops in the optimizer
// use.

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  char sense = 'L';                           // 'L' <=, 'G' >=, 'E' ==
  double rhs = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

class DenseSimplex {
 public:
  // Bounds may be +-infinity. The objective is maximised.
  DenseSimplex(std::vector<double> objective, std::vector<double> lower,
               std::vector<double> upper)
      : n_struct_(static_cast<int>(objective.size())),
        cost_(std::move(objective)),
        lo_(std::move(lower)),
        hi_(std::move(upper)) {
    if (lo_.size() != cost_.size() || hi_.size() != cost_.size())
      throw SizeMismatch("simplex bounds/objective sizes");
    pinned_.resize(n_struct_);
    in_row_.assign(n_struct_, -1);
    for (int j = 0; j < n_struct_; ++j) pinned_[j] = default_pin(j);
  }

  // Pins the nonbasic value of a structural variable (warm start). Must be
  // called before the first solve; the point must satisfy every row added
  // so far if the caller wants to skip phase 1.
  void pin(int var, double value) { pinned_[var] = value; }

  // Requests that `col` start out basic in `row`. Applied right after the
  // tableau is built, without moving the current point: the displaced slack
  // is pinned at its current value. Useful when the caller knows a sparse
  // near-triangular basis, which saves the simplex from walking into it one
  // entering step at a time.
  void request_basis(int row, int col) { forced_.emplace_back(row, col); }

  int add_row(const LpRow& row) {
    const int r = static_cast<int>(rows_.size());
    rows_.push_back(row);
    // slack column: x_slack = rhs - a.x, bounds encode the sense
    double slo = 0.0, shi = 0.0;
    if (row.sense == 'L') shi = kInf;
    if (row.sense == 'G') slo = -kInf;
    cost_.push_back(0.0);
    lo_.push_back(slo);
    hi_.push_back(shi);
    pinned_.push_back(0.0);
    in_row_.push_back(r);
    slack_col_.push_back(num_cols() - 1);

    if (!tableau_.empty()) embed_row(r);
    return r;
  }

  int row_count() const { return static_cast<int>(rows_.size()); }
  int num_cols() const { return static_cast<int>(cost_.size()); }

  LpStatus solve(long iteration_limit = -1) {
    if (tableau_.empty()) {
      init_tableau();
      for (auto [r, j] : forced_) force_pivot(r, j);
      forced_.clear();
      dual_ready_ = false;
    }
    if (iteration_limit < 0) iteration_limit = 20000 + 60L * (row_count() + num_cols());
    long iters = 0;

    // re-solves after row additions keep a dual-feasible basis: repair the
    // violated basics with dual pivots, then confirm with a priced pass
    if (dual_ready_ && dual_repair(&iters, iteration_limit)) {
      long before = iters;
      status_ = phase2(&iters, iteration_limit);
      phase2_iterations_ += iters - before;
      total_iterations_ += iters;
      if (status_ == LpStatus::Optimal) return status_;
    }

    LpStatus st = phase1(&iters, iteration_limit);
    phase1_iterations_ += iters;
    if (st != LpStatus::Optimal) {
      dual_ready_ = false;
      return status_ = st;
    }
    compute_reduced_costs();
    long before = iters;
    status_ = phase2(&iters, iteration_limit);
    phase2_iterations_ += iters - before;
    total_iterations_ += iters;
    dual_ready_ = status_ == LpStatus::Optimal;
    return status_;
  }

  long total_iterations() const { return total_iterations_; }
  long phase1_iterations() const { return phase1_iterations_; }
  long phase2_iterations() const { return phase2_iterations_; }
  long degenerate_iterations() const { return degenerate_iterations_; }
  long elim_cells() const { return elim_cells_; }
  long dual_iterations() const { return dual_iterations_; }

  LpStatus status() const { return status_; }

  double objective_value() const {
    double acc = 0.0;
    for (int j = 0; j < n_struct_; ++j) acc += cost_[j] * value(j);
    return acc;
  }

  double value(int var) const {
    return in_row_[var] >= 0 ? beta_[in_row_[var]] : pinned_[var];
  }

  std::vector<double> solution() const {
    std::vector<double> x(n_struct_);
    for (int j = 0; j < n_struct_; ++j) x[j] = value(j);
    return x;
  }

  // Max bound violation over basic variables; ~0 after an Optimal solve.
  double primal_infeasibility() const {
    double worst = 0.0;
    for (int r = 0; r < row_count(); ++r) {
      int j = basic_[r];
      worst = std::max(worst, std::max(lo_[j] - beta_[r], beta_[r] - hi_[j]));
    }
    return std::max(worst, 0.0);
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kTol = 1e-9;        // reduced cost / feasibility tolerance
  static constexpr double kPivotTol = 1e-9;   // minimum acceptable pivot magnitude
  static constexpr double kDegenTol = 1e-12;  // step below this counts as degenerate

  double default_pin(int j) const {
    if (std::isfinite(lo_[j]) && lo_[j] <= 0.0 && (hi_[j] >= 0.0)) return 0.0;
    if (std::isfinite(lo_[j])) return lo_[j];
    if (std::isfinite(hi_[j])) return std::min(hi_[j], 0.0);
    return 0.0;
  }

  // Builds the initial tableau with the all-slack basis at the pinned point.
  void init_tableau() {
    const int m = row_count();
    tableau_.assign(m, {});
    basic_.assign(m, -1);
    beta_.assign(m, 0.0);
    for (int r = 0; r < m; ++r) {
      auto& t = tableau_[r];
      t.assign(num_cols(), 0.0);
      for (const auto& [j, a] : rows_[r].terms) t[j] += a;
      t[slack_col_[r]] = 1.0;
      basic_[r] = slack_col_[r];
      in_row_[slack_col_[r]] = r;
      beta_[r] = slack_value(r);
    }
    z_.assign(num_cols(), 0.0);
  }

  double slack_value(int r) const {
    double ax = 0.0;
    for (const auto& [j, a] : rows_[r].terms) ax += a * value(j);
    return rows_[r].rhs - ax;
  }

  // Expresses a newly added row in the current basis. Basic columns of the
  // tableau are unit vectors, so one elimination per nonzero original
  // coefficient on a basic variable suffices.
  void embed_row(int r) {
    const int cols = num_cols();
    for (auto& row : tableau_) row.resize(cols, 0.0);
    z_.resize(cols, 0.0);

    std::vector<double> t(cols, 0.0);
    for (const auto& [j, a] : rows_[r].terms) t[j] += a;
    t[slack_col_[r]] = 1.0;
    for (const auto& [j, a] : rows_[r].terms) {
      if (in_row_[j] >= 0 && in_row_[j] < static_cast<int>(tableau_.size())) {
        const int br = in_row_[j];
        const double coef = t[basic_[br]];
        if (coef != 0.0) {
          const auto& src = tableau_[br];
          for (int k = 0; k < cols; ++k) t[k] -= coef * src[k];
        }
      }
    }
    tableau_.push_back(std::move(t));
    basic_.push_back(slack_col_[r]);
    in_row_[slack_col_[r]] = r;
    beta_.push_back(slack_value(r));
  }

  // Subtracts multiples of the (already normalised) pivot row r from every
  // other row so column j becomes a unit vector.
  void eliminate_column(int r, int j) {
    const int m = row_count();
    const int cols = num_cols();
    const auto& prow = tableau_[r];
    for (int i = 0; i < m; ++i) elim_cells_ += tableau_[i][j] != 0.0 ? cols : 0;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      auto& row = tableau_[i];
      const double f = row[j];
      if (f == 0.0) continue;
      const double* src = prow.data();
      double* dst = row.data();
      for (int k = 0; k < cols; ++k) dst[k] -= f * src[k];
      row[j] = 0.0;
    }
  }

  // Basis change at (r, j) without moving the current point.
  void force_pivot(int r, int j) {
    if (in_row_[j] >= 0) return;
    const double p = tableau_[r][j];
    if (std::abs(p) <= kPivotTol) return;
    const int out = basic_[r];
    const int cols = num_cols();
    auto& prow = tableau_[r];
    const double invp = 1.0 / p;
    for (int k = 0; k < cols; ++k) prow[k] *= invp;
    prow[j] = 1.0;
    eliminate_column(r, j);
    in_row_[out] = -1;
    pinned_[out] = beta_[r];
    basic_[r] = j;
    in_row_[j] = r;
    beta_[r] = pinned_[j];
  }

  void compute_reduced_costs() {
    const int m = row_count();
    const int cols = num_cols();
    z_.assign(cost_.begin(), cost_.end());
    for (int r = 0; r < m; ++r) {
      const double cb = cost_[basic_[r]];
      if (cb == 0.0) continue;
      const auto& t = tableau_[r];
      for (int k = 0; k < cols; ++k) z_[k] -= cb * t[k];
    }
  }

  bool can_increase(int j) const { return value(j) < hi_[j] - kDegenTol || !(std::isfinite(hi_[j])); }
  bool can_decrease(int j) const { return value(j) > lo_[j] + kDegenTol || !(std::isfinite(lo_[j])); }

  struct Ratio {
    double step = kInf;
    int leaving_row = -1;   // -1: own bound flip
    double leave_at = 0.0;  // bound the leaving variable lands on
    double pivot = 0.0;
  };

  // Largest step for entering column j in direction dir; `phase1_rows`
  // marks currently infeasible basics, which are only limited by the bound
  // they violate.
  Ratio ratio_test(int j, int dir, const std::vector<int>& infeas_kind) const {
    Ratio best;
    // own bound
    if (dir > 0 && std::isfinite(hi_[j])) best.step = hi_[j] - value(j);
    if (dir < 0 && std::isfinite(lo_[j])) best.step = value(j) - lo_[j];

    const int m = row_count();
    for (int r = 0; r < m; ++r) {
      const double a = tableau_[r][j];
      if (std::abs(a) <= kPivotTol) continue;
      const int b = basic_[r];
      const double g = dir * a;  // x_B(r) moves by -g * step
      double limit = kInf, land = 0.0;
      if (infeas_kind[r] < 0) {
        // below lower bound: only the violated bound stops it
        if (-g > 0.0) {
          limit = (lo_[b] - beta_[r]) / (-g);
          land = lo_[b];
        }
      } else if (infeas_kind[r] > 0) {
        if (-g < 0.0) {
          limit = (beta_[r] - hi_[b]) / g;
          land = hi_[b];
        }
      } else if (g > 0.0) {
        if (std::isfinite(lo_[b])) {
          limit = (beta_[r] - lo_[b]) / g;
          land = lo_[b];
        }
      } else {
        if (std::isfinite(hi_[b])) {
          limit = (hi_[b] - beta_[r]) / (-g);
          land = hi_[b];
        }
      }
      if (limit >= kInf) continue;
      if (limit < 0.0) limit = 0.0;
      // prefer strictly smaller ratios; among near-ties take the larger
      // pivot for stability, then the lower row index for determinism
      if (limit < best.step - 1e-10 ||
          (limit < best.step + 1e-10 && best.leaving_row >= 0 &&
           std::abs(a) > std::abs(best.pivot) + 1e-12)) {
        best.step = limit;
        best.leaving_row = r;
        best.leave_at = land;
        best.pivot = a;
      }
    }
    return best;
  }

  void apply_step(int j, int dir, const Ratio& ratio) {
    const int m = row_count();
    const double step = ratio.step;
    if (ratio.leaving_row < 0) {
      // bound flip: no basis change
      for (int r = 0; r < m; ++r) beta_[r] -= dir * step * tableau_[r][j];
      pinned_[j] = value(j) + dir * step;
      return;
    }
    const int r = ratio.leaving_row;
    const int out = basic_[r];
    const double entering_value = value(j) + dir * step;
    for (int i = 0; i < m; ++i)
      if (i != r) beta_[i] -= dir * step * tableau_[i][j];

    // pivot on (r, j)
    auto& prow = tableau_[r];
    const double p = prow[j];
    const int cols = num_cols();
    const double invp = 1.0 / p;
    for (int k = 0; k < cols; ++k) prow[k] *= invp;
    prow[j] = 1.0;
    eliminate_column(r, j);
    if (!z_.empty()) {
      const double f = z_[j];
      if (f != 0.0) {
        for (int k = 0; k < cols; ++k) z_[k] -= f * prow[k];
        z_[j] = 0.0;
      }
    }
    if (!devex_.empty()) {
      // reference-framework devex update over the normalised pivot row
      double wq = std::max(devex_[j], 1.0);
      double biggest = 1.0;
      for (int k = 0; k < cols; ++k) {
        if (prow[k] == 0.0 || in_row_[k] >= 0) continue;
        devex_[k] = std::max(devex_[k], prow[k] * prow[k] * wq);
        biggest = std::max(biggest, devex_[k]);
      }
      devex_[out] = std::max(wq * invp * invp, 1.0);
      if (biggest > 1e10) std::fill(devex_.begin(), devex_.end(), 1.0);
    }

    in_row_[out] = -1;
    pinned_[out] = ratio.leave_at;
    basic_[r] = j;
    in_row_[j] = r;
    beta_[r] = entering_value;
  }

  // kind: -1 below lower, +1 above upper, 0 feasible.
  double classify_infeasible(std::vector<int>* kind) const {
    const int m = row_count();
    kind->assign(m, 0);
    double total = 0.0;
    for (int r = 0; r < m; ++r) {
      const int b = basic_[r];
      if (beta_[r] < lo_[b] - kTol) {
        (*kind)[r] = -1;
        total += lo_[b] - beta_[r];
      } else if (beta_[r] > hi_[b] + kTol) {
        (*kind)[r] = 1;
        total += beta_[r] - hi_[b];
      }
    }
    return total;
  }

  // Dual simplex repair: while some basic variable violates a bound, pivot
  // it out at that bound against the entering column with the smallest
  // dual ratio, which preserves the optimality of the reduced costs. Used
  // after rows are appended to an optimal basis; returns false to request
  // the composite primal fallback.
  bool dual_repair(long* iters, long limit) {
    if (z_.size() != static_cast<std::size_t>(num_cols())) return false;
    const int cols = num_cols();
    while (true) {
      if (++(*iters) > limit) return false;
      int r = -1;
      double worst = kTol;
      for (int i = 0; i < row_count(); ++i) {
        const int b = basic_[i];
        const double viol = std::max(lo_[b] - beta_[i], beta_[i] - hi_[b]);
        if (viol > worst) {
          worst = viol;
          r = i;
        }
      }
      if (r < 0) return true;  // primal feasible again
      const int b = basic_[r];
      const bool below = beta_[r] < lo_[b];
      const double target = below ? lo_[b] : hi_[b];

      int best_j = -1;
      double best_theta = 0.0, best_pivot = 0.0;
      int best_dir = 0;
      const auto& row = tableau_[r];
      for (int j = 0; j < cols; ++j) {
        if (in_row_[j] >= 0 || lo_[j] == hi_[j]) continue;
        const double a = row[j];
        if (std::abs(a) <= kPivotTol) continue;
        // moving x_j by dir changes x_B(r) by -a * dir; it must move toward
        // the violated bound
        int dir = 0;
        const double needed = below ? 1.0 : -1.0;  // sign of the required change
        if (-a * needed > 0.0 && can_increase(j)) dir = 1;
        else if (a * needed > 0.0 && can_decrease(j)) dir = -1;
        if (dir == 0) continue;
        const double theta = std::abs(z_[j] / a);
        if (best_j < 0 || theta < best_theta - 1e-12 ||
            (theta < best_theta + 1e-12 && std::abs(a) > std::abs(best_pivot))) {
          best_j = j;
          best_theta = theta;
          best_pivot = a;
          best_dir = dir;
        }
      }
      if (best_j < 0) return false;  // no dual step available; fall back

      Ratio ratio;
      ratio.leaving_row = r;
      ratio.leave_at = target;
      ratio.pivot = best_pivot;
      ratio.step = std::abs((beta_[r] - target) / best_pivot);
      dual_iterations_ += 1;
      total_iterations_ += 1;
      apply_step(best_j, best_dir, ratio);
    }
  }

  // Composite phase 1: minimise the total bound violation of the basic
  // variables. The violation gradient over nonbasic columns is the signed
  // sum of the infeasible rows; it is maintained incrementally across
  // pivots (one rank-1 correction plus adjustments for rows whose
  // feasibility state flipped), with periodic full recomputes against
  // drift.
  LpStatus phase1(long* iters, long limit) {
    std::vector<int> kind;
    double infeas = classify_infeasible(&kind);
    if (infeas <= kTol) return LpStatus::Optimal;

    const int cols = num_cols();
    std::vector<double> h(cols, 0.0);
    auto recompute_h = [&] {
      std::fill(h.begin(), h.end(), 0.0);
      for (int r = 0; r < row_count(); ++r) {
        if (kind[r] == 0) continue;
        const double s = kind[r] < 0 ? 1.0 : -1.0;
        const auto& t = tableau_[r];
        for (int k = 0; k < cols; ++k) h[k] += s * t[k];
      }
    };
    recompute_h();

    int degen_streak = 0;
    int since_refresh = 0;
    while (infeas > kTol) {
      if (++(*iters) > limit) return LpStatus::IterationLimit;
      const bool bland = degen_streak > 200;
      int best_j = -1, best_dir = 0;
      double best_score = kTol;
      for (int j = 0; j < cols; ++j) {
        if (in_row_[j] >= 0) continue;
        if (lo_[j] == hi_[j]) continue;
        int dir = 0;
        if (h[j] < -kTol && can_increase(j)) dir = 1;
        else if (h[j] > kTol && can_decrease(j)) dir = -1;
        if (dir == 0) continue;
        if (bland) { best_j = j; best_dir = dir; break; }
        if (std::abs(h[j]) > best_score) {
          best_score = std::abs(h[j]);
          best_j = j;
          best_dir = dir;
        }
      }
      if (best_j < 0) {
        // stale incremental state can hide progress; retry once from scratch
        recompute_h();
        since_refresh = 0;
        double probe = kTol;
        for (int j = 0; j < cols && best_j < 0; ++j) {
          if (in_row_[j] >= 0 || lo_[j] == hi_[j]) continue;
          if (h[j] < -probe && can_increase(j)) { best_j = j; best_dir = 1; }
          else if (h[j] > probe && can_decrease(j)) { best_j = j; best_dir = -1; }
        }
        if (best_j < 0) return LpStatus::Infeasible;
      }

      Ratio ratio = ratio_test(best_j, best_dir, kind);
      if (ratio.step >= kInf) return LpStatus::Infeasible;  // infeasibility ray
      if (ratio.step <= kDegenTol) ++degen_streak; else degen_streak = 0;

      const double hj = h[best_j];
      const int pivot_row = ratio.leaving_row;
      const int old_kind = pivot_row >= 0 ? kind[pivot_row] : 0;
      apply_step(best_j, best_dir, ratio);

      if (pivot_row >= 0) {
        const auto& prow = tableau_[pivot_row];
        const double corr = -hj + (old_kind == 0 ? 0.0 : (old_kind < 0 ? 1.0 : -1.0));
        if (corr != 0.0)
          for (int k = 0; k < cols; ++k) h[k] += corr * prow[k];
      }
      std::vector<int> fresh;
      infeas = classify_infeasible(&fresh);
      for (int r = 0; r < row_count(); ++r) {
        if (fresh[r] == kind[r]) continue;
        const double ds = (fresh[r] == 0 ? 0.0 : (fresh[r] < 0 ? 1.0 : -1.0)) -
                          (kind[r] == 0 ? 0.0 : (kind[r] < 0 ? 1.0 : -1.0));
        if (ds != 0.0) {
          const auto& t = tableau_[r];
          for (int k = 0; k < cols; ++k) h[k] += ds * t[k];
        }
      }
      kind = std::move(fresh);
      if (++since_refresh >= 256) {
        recompute_h();
        since_refresh = 0;
      }
    }
    return LpStatus::Optimal;
  }

  LpStatus phase2(long* iters, long limit) {
    const std::vector<int> feasible_kind(row_count(), 0);
    int degen_streak = 0;
    long recompute_in = 2000;
    devex_.assign(num_cols(), 1.0);
    while (true) {
      if (++(*iters) > limit) return LpStatus::IterationLimit;
      const bool bland = degen_streak > 200;
      int best_j = -1, best_dir = 0;
      double best_score = 0.0;
      const int cols = num_cols();
      for (int j = 0; j < cols; ++j) {
        if (in_row_[j] >= 0) continue;
        if (lo_[j] == hi_[j]) continue;
        int dir = 0;
        if (z_[j] > kTol && can_increase(j)) dir = 1;
        else if (z_[j] < -kTol && can_decrease(j)) dir = -1;
        if (dir == 0) continue;
        if (bland) { best_j = j; best_dir = dir; break; }
        double score = z_[j] * z_[j] / devex_[j];
        if (score > best_score) {
          best_score = score;
          best_j = j;
          best_dir = dir;
        }
      }
      if (best_j < 0) {
        devex_.clear();
        return LpStatus::Optimal;
      }

      Ratio ratio = ratio_test(best_j, best_dir, feasible_kind);
      if (ratio.step >= kInf) {
        devex_.clear();
        return LpStatus::Unbounded;
      }
      if (ratio.step <= kDegenTol) { ++degen_streak; ++degenerate_iterations_; } else degen_streak = 0;
      apply_step(best_j, best_dir, ratio);

      if (--recompute_in <= 0) {  // counter floating point drift on long runs
        compute_reduced_costs();
        recompute_in = 2000;
      }
    }
  }

  int n_struct_;
  std::vector<double> cost_, lo_, hi_, pinned_;
  std::vector<LpRow> rows_;
  std::vector<int> slack_col_;

  std::vector<std::vector<double>> tableau_;
  std::vector<int> basic_;    // per row: basic column
  std::vector<int> in_row_;   // per column: row it is basic in, -1 if nonbasic
  std::vector<double> beta_;  // per row: value of its basic variable
  std::vector<double> z_;      // reduced costs (phase 2)
  std::vector<double> devex_;  // devex pricing weights, live during phase 2
  std::vector<std::pair<int, int>> forced_;
  LpStatus status_ = LpStatus::Optimal;
  long total_iterations_ = 0;
  long phase1_iterations_ = 0;
  long phase2_iterations_ = 0;
  long degenerate_iterations_ = 0;
  long dual_iterations_ = 0;
  long elim_cells_ = 0;
  bool dual_ready_ = false;
};

}  // namespace rumax
