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
#include <string>
#include <vector>

#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/tree.hpp"

namespace rumax {

// A finitely supported law on R^2: the joint distribution of a one-asset
// price at the two trading dates.
struct TwoPeriodLaw {
  struct Atom {
    double x1, x2, mass;
  };
  std::vector<Atom> atoms;

  void normalise() {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      return a.x1 < b.x1 || (a.x1 == b.x1 && a.x2 < b.x2);
    });
    std::vector<Atom> merged;
    for (const Atom& a : atoms) {
      if (!merged.empty() && std::abs(merged.back().x1 - a.x1) <= 1e-12 &&
          std::abs(merged.back().x2 - a.x2) <= 1e-12) {
        merged.back().mass += a.mass;
      } else {
        merged.push_back(a);
      }
    }
    atoms = std::move(merged);
  }
};

// Joint law of (S_1, S_2) under the reference measure; two-period
// one-asset trees only.
inline TwoPeriodLaw path_law(const FilteredTree& tree, const PriceModel& model) {
  if (tree.horizon() != 2) throw UnsupportedHorizon("path laws need horizon 2");
  if (model.dim() != 1) throw UnsupportedHorizon("path laws need one asset");
  TwoPeriodLaw law;
  for (int leaf : tree.leaves()) {
    int mid = tree.node(leaf).parent;
    double s1 = model.initial[0] + model.increment(mid)[0];
    double s2 = s1 + model.increment(leaf)[0];
    law.atoms.push_back({s1, s2, tree.node(leaf).path_prob});
  }
  law.normalise();
  return law;
}

struct TimeConsistencyVerdict {
  bool consistent = true;
  std::string witness;  // description of the missing recombination
};

namespace detail {

struct Marginal {
  std::vector<std::pair<double, double>> atoms;  // (x1, mass)
};

// Conditional laws of the increment x2 - x1 given x1. Storing increments
// rather than positions lets a kernel whose conditional law does not depend
// on the first-period value be evaluated at first-period points outside its
// own support, which is exactly what structural price models imply.
struct Kernel {
  std::vector<double> support;                                  // x1 points
  std::vector<std::vector<std::pair<double, double>>> laws;     // per point: (dx, mass)
  bool translation_invariant = true;

  const std::vector<std::pair<double, double>>* at(double x1) const {
    for (std::size_t i = 0; i < support.size(); ++i)
      if (std::abs(support[i] - x1) <= 1e-12) return &laws[i];
    return translation_invariant && !laws.empty() ? &laws[0] : nullptr;
  }
};

inline void decompose(const TwoPeriodLaw& law, Marginal* marginal, Kernel* kernel) {
  for (const auto& atom : law.atoms) {
    std::size_t i = 0;
    for (; i < kernel->support.size(); ++i)
      if (std::abs(kernel->support[i] - atom.x1) <= 1e-12) break;
    if (i == kernel->support.size()) {
      kernel->support.push_back(atom.x1);
      kernel->laws.emplace_back();
      marginal->atoms.emplace_back(atom.x1, 0.0);
    }
    marginal->atoms[i].second += atom.mass;
    kernel->laws[i].emplace_back(atom.x2 - atom.x1, atom.mass);
  }
  for (std::size_t i = 0; i < kernel->support.size(); ++i) {
    double total = marginal->atoms[i].second;
    for (auto& [dx, m] : kernel->laws[i]) m /= total;
    std::sort(kernel->laws[i].begin(), kernel->laws[i].end());
  }
  for (std::size_t i = 1; i < kernel->laws.size(); ++i) {
    if (kernel->laws[i].size() != kernel->laws[0].size()) {
      kernel->translation_invariant = false;
      break;
    }
    for (std::size_t a = 0; a < kernel->laws[i].size(); ++a)
      if (std::abs(kernel->laws[i][a].first - kernel->laws[0][a].first) > 1e-12 ||
          std::abs(kernel->laws[i][a].second - kernel->laws[0][a].second) > 1e-12) {
        kernel->translation_invariant = false;
        break;
      }
  }
}

inline bool same_law(const TwoPeriodLaw& a, const TwoPeriodLaw& b) {
  if (a.atoms.size() != b.atoms.size()) return false;
  for (std::size_t i = 0; i < a.atoms.size(); ++i)
    if (std::abs(a.atoms[i].x1 - b.atoms[i].x1) > 1e-12 ||
        std::abs(a.atoms[i].x2 - b.atoms[i].x2) > 1e-12 ||
        std::abs(a.atoms[i].mass - b.atoms[i].mass) > 1e-12)
      return false;
  return true;
}

}  // namespace detail

// Rectangularity of a family of two-period laws: decompose each into a
// first marginal and second-period kernels, form every recombination
// marginal_i (x) kernel_j, and require each recombination to be a member of
// the family (supports and masses within 1e-12). The first missing
// recombination is reported as the witness.
inline TimeConsistencyVerdict time_consistency_check(const std::vector<TwoPeriodLaw>& laws) {
  if (laws.empty()) throw BadParameters("need at least one law");

  std::vector<detail::Marginal> marginals(laws.size());
  std::vector<detail::Kernel> kernels(laws.size());
  for (std::size_t i = 0; i < laws.size(); ++i)
    detail::decompose(laws[i], &marginals[i], &kernels[i]);

  for (std::size_t i = 0; i < laws.size(); ++i) {
    for (std::size_t j = 0; j < laws.size(); ++j) {
      TwoPeriodLaw combined;
      bool defined = true;
      for (const auto& [x1, p1] : marginals[i].atoms) {
        const auto* cond = kernels[j].at(x1);
        if (cond == nullptr) {
          defined = false;
          break;
        }
        for (const auto& [dx, p2] : *cond)
          combined.atoms.push_back({x1, x1 + dx, p1 * p2});
      }
      std::string name =
          "P_0^" + std::to_string(i + 1) + " (x) P_1^" + std::to_string(j + 1);
      if (!defined)
        return {false, name + " (kernel undefined off its own support)"};
      combined.normalise();
      bool member = false;
      for (const TwoPeriodLaw& candidate : laws)
        if (detail::same_law(combined, candidate)) {
          member = true;
          break;
        }
      if (!member) return {false, name};
    }
  }
  return {true, ""};
}

// All recombinations of the given laws; the closure is time-consistent by
// construction.
inline std::vector<TwoPeriodLaw> recombination_closure(const std::vector<TwoPeriodLaw>& laws) {
  std::vector<detail::Marginal> marginals(laws.size());
  std::vector<detail::Kernel> kernels(laws.size());
  for (std::size_t i = 0; i < laws.size(); ++i)
    detail::decompose(laws[i], &marginals[i], &kernels[i]);
  std::vector<TwoPeriodLaw> out;
  for (std::size_t i = 0; i < laws.size(); ++i)
    for (std::size_t j = 0; j < laws.size(); ++j) {
      TwoPeriodLaw combined;
      for (const auto& [x1, p1] : marginals[i].atoms) {
        const auto* cond = kernels[j].at(x1);
        if (cond == nullptr) throw BadParameters("kernel undefined off its own support");
        for (const auto& [dx, p2] : *cond)
          combined.atoms.push_back({x1, x1 + dx, p1 * p2});
      }
      combined.normalise();
      out.push_back(std::move(combined));
    }
  return out;
}

}  // namespace rumax
