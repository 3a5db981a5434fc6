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
#include <optional>
#include <string>
#include <vector>

#include "rumax/arbitrage.hpp"
#include "rumax/market.hpp"
#include "rumax/optimizer.hpp"
#include "rumax/utility.hpp"

namespace rumax {

// Which existence guarantees apply to a (family, utility, capital, mode)
// instance. Four hypothesis sets are checked:
//   bounded_halfline    - bounded-above utility on the positive axis with at
//                         least one arbitrage-free non-redundant model
//   sublinear_halfline  - unbounded utility on the positive axis; adds the
//                         moment conditions on increments and 1/beta, which
//                         any finite tree satisfies with finite witnesses
//   bounded_wholeline   - bounded-above utility on the whole line
//   sublinear_wholeline - unbounded utility on the whole line; every model
//                         must be arbitrage-free and non-redundant, the
//                         utility strictly sublinear, and the per-model
//                         moment witnesses finite
struct HypothesisReport {
  struct Condition {
    std::string name;
    bool holds;
    std::string detail;
  };

  bool bounded_halfline = false;
  bool sublinear_halfline = false;
  bool bounded_wholeline = false;
  bool sublinear_wholeline = false;
  std::vector<Condition> conditions;

  // finite-space moment witnesses
  double max_inv_beta = 0.0;
  double max_inv_kappa = 0.0;
  double max_increment_norm = 0.0;
};

inline HypothesisReport hypothesis_report(const ModelFamily& family, const UtilitySpec& u,
                                          double w0, AdmissibilityMode mode) {
  (void)w0;
  HypothesisReport report;
  auto add = [&](const std::string& name, bool holds, const std::string& detail = "") {
    report.conditions.push_back({name, holds, detail});
    return holds;
  };

  std::vector<std::string> stars = assumption_na(family);
  const bool reference_exists =
      add("arbitrage-free non-redundant reference model", !stars.empty(),
          stars.empty() ? "no qualifying model" : "witness " + stars.front());

  bool all_star = stars.size() == family.models.size();
  add("every model qualifies as a reference", all_star);

  const bool bounded = add("utility bounded above", u.bounded_above());
  const bool positive_domain = u.domain() == UtilityDomain::Positive;
  add("utility domain is the positive half-line", positive_domain);
  add("utility domain is the whole line", !positive_domain);

  const bool positive_mode = mode != AdmissibilityMode::Unconstrained;
  add("admissibility matches the domain",
      positive_domain == positive_mode,
      positive_mode ? "wealth constrained non-negative" : "unconstrained positions");

  auto growth = growth_certificate(u);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(0.05 * i);
  const bool sublinear =
      add("strictly sublinear growth",
          growth.has_value() && check_growth(u, growth->first, growth->second, grid),
          growth.has_value()
              ? "C=" + std::to_string(growth->first) + ", alpha=" + std::to_string(growth->second)
              : "no certificate");

  // moment witnesses: automatic on a finite tree, reported with max values
  const FilteredTree& tree = family.t();
  for (const PriceModel& m : family.models) {
    for (int id = 1; id < tree.node_count(); ++id)
      report.max_increment_norm = std::max(report.max_increment_norm, m.increment(id).norm());
    if (na_check(tree, m).na) {
      NACertificate cert = certificate(tree, m);
      for (const auto& level : cert.entries)
        for (const NodeCertificate& nc : level) {
          if (nc.degenerate) continue;
          report.max_inv_beta = std::max(report.max_inv_beta, 1.0 / nc.beta);
          report.max_inv_kappa = std::max(report.max_inv_kappa, 1.0 / nc.kappa);
        }
    }
  }
  add("moment conditions (finite space)", true,
      "max 1/beta " + std::to_string(report.max_inv_beta) + ", max 1/kappa " +
          std::to_string(report.max_inv_kappa) + ", max |dS| " +
          std::to_string(report.max_increment_norm));

  report.bounded_halfline = reference_exists && bounded && positive_domain && positive_mode;
  report.sublinear_halfline = reference_exists && positive_domain && positive_mode;
  report.bounded_wholeline = reference_exists && bounded && !positive_domain && !positive_mode;
  report.sublinear_wholeline =
      all_star && sublinear && !positive_domain && !positive_mode && !family.models.empty();
  return report;
}

}  // namespace rumax
