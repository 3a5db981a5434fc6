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
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/rng.hpp"
#include "rumax/simplex.hpp"
#include "rumax/tree.hpp"

namespace rumax {

// Quantitative one-step no-arbitrage certificates. At every decision node
// beta is the origin-centred in-radius of the convex hull of the child
// increments inside their linear support: every unit direction of the
// support loses at least beta against some child. kappa is a conditional
// probability mass floor for that loss event. Nodes whose support is {0}
// carry the vacuous certificate (+inf, 1).
struct NodeCertificate {
  double beta = 0.0;
  double kappa = 0.0;
  int support_dim = 0;
  bool degenerate = false;  // support == {0}
};

struct NACertificate {
  std::vector<std::vector<NodeCertificate>> entries;  // [t-1][depth_index]
  bool na = false;

  const NodeCertificate& at(const FilteredTree& tree, int t, int node_id) const {
    return entries[t - 1][tree.node(node_id).depth_index];
  }
};

// Per-node admissibility bounds G_t on projected positions, one value per
// depth-(t-1) node. +inf on degenerate-support nodes, where the projected
// position is 0 and the bound is vacuous.
struct BoundProcess {
  std::vector<std::vector<double>> values;  // [t-1][depth_index]

  double at(const FilteredTree& tree, int t, int node_id) const {
    return values[t - 1][tree.node(node_id).depth_index];
  }
};

namespace geom {

// Distinct support points with aggregated masses. Children of wide
// fan-outs often repeat the same increment, and every computation below
// only depends on the distinct values.
struct WeightedPoints {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> mass;  // conditional probabilities, sum 1
};

inline WeightedPoints dedupe(const std::vector<Eigen::VectorXd>& pts,
                             const std::vector<double>& mass) {
  WeightedPoints out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool merged = false;
    for (std::size_t k = 0; k < out.pts.size(); ++k) {
      if (out.pts[k].size() == pts[i].size() && out.pts[k] == pts[i]) {
        out.mass[k] += mass[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.pts.push_back(pts[i]);
      out.mass.push_back(mass[i]);
    }
  }
  return out;
}

// 2D convex hull, counter-clockwise (Andrew's monotone chain).
inline std::vector<Eigen::Vector2d> hull_2d(std::vector<Eigen::Vector2d> p) {
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const auto& a, const auto& b) { return a == b; }),
          p.end());
  const int n = static_cast<int>(p.size());
  if (n < 3) return p;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

// Largest r such that the origin-centred ball of radius r lies in
// conv(points). Zero when the origin is outside or on the boundary.
// Exact facet enumeration up to dimension 3; dense direction sampling with
// a 1% safety shrink beyond that.
inline double in_radius(const WeightedPoints& w, std::uint64_t seed = 0) {
  const int m = w.pts.empty() ? 0 : static_cast<int>(w.pts[0].size());
  if (m == 0 || w.pts.empty()) return 0.0;

  if (m == 1) {
    double lo = w.pts[0][0], hi = w.pts[0][0];
    for (const auto& p : w.pts) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    return std::max(0.0, std::min(-lo, hi));
  }

  if (m == 2) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(w.pts.size());
    for (const auto& p : w.pts) pts.emplace_back(p[0], p[1]);
    auto hull = hull_2d(std::move(pts));
    if (hull.size() < 3) return 0.0;
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Eigen::Vector2d& a = hull[i];
      const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
      Eigen::Vector2d dir = b - a;
      double len = dir.norm();
      if (len < 1e-14) continue;
      // outward normal of a CCW edge
      Eigen::Vector2d nrm(dir.y() / len, -dir.x() / len);
      r = std::min(r, nrm.dot(a));
    }
    return std::max(0.0, std::isfinite(r) ? r : 0.0);
  }

  if (m == 3) {
    const int n = static_cast<int>(w.pts.size());
    double scale = 0.0;
    for (const auto& p : w.pts) scale = std::max(scale, p.norm());
    const double eps = 1e-11 * std::max(scale, 1.0);
    double r = std::numeric_limits<double>::infinity();
    bool any_facet = false;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          Eigen::Vector3d a = w.pts[i].head<3>(), b = w.pts[j].head<3>(), c = w.pts[k].head<3>();
          Eigen::Vector3d nrm = (b - a).cross(c - a);
          double len = nrm.norm();
          if (len < 1e-12 * std::max(scale * scale, 1.0)) continue;
          nrm /= len;
          double off = nrm.dot(a);
          bool below = true, above = true;
          for (int q = 0; q < n && (below || above); ++q) {
            double v = nrm.dot(w.pts[q].head<3>());
            if (v > off + eps) below = false;
            if (v < off - eps) above = false;
          }
          if (below) {
            any_facet = true;
            r = std::min(r, off);
          } else if (above) {
            any_facet = true;
            r = std::min(r, -off);
          }
        }
    if (!any_facet) return 0.0;  // degenerate hull
    return std::max(0.0, std::isfinite(r) ? r : 0.0);
  }

  // dimension >= 4: sampled support function, reported as a certified
  // lower bound after shrinking by 1%
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  double r = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd xi = rng.unit_vector(m);
    double support = -std::numeric_limits<double>::infinity();
    for (const auto& p : w.pts) support = std::max(support, xi.dot(p));
    r = std::min(r, support);
    if (r <= 0.0) return 0.0;
  }
  return 0.99 * r;
}

// Infimum over unit directions xi of the mass of {<xi, p> <= -threshold}.
// Exact for dimensions 1 and 2 (two directions / circular sweep over the
// arc arrangement). For dimension >= 3 the infimum of the piecewise
// constant function is combinatorial, so the always-valid floor is used
// instead: for any direction at least one point lies at or below
// -threshold, hence the minimum aggregated point mass is a sound kappa.
inline double worst_direction_mass(const WeightedPoints& w, double threshold) {
  const int m = static_cast<int>(w.pts[0].size());
  if (m == 1) {
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < w.pts.size(); ++i) {
      if (w.pts[i][0] <= -threshold) plus += w.mass[i];
      if (-w.pts[i][0] <= -threshold) minus += w.mass[i];
    }
    return std::min(plus, minus);
  }
  if (m == 2) {
    // each point qualifies on an arc of directions; sweep the arrangement
    const double two_pi = 6.283185307179586477;
    std::vector<double> events;
    std::vector<std::pair<double, double>> arcs;  // (centre, half width)
    for (std::size_t i = 0; i < w.pts.size(); ++i) {
      double norm = w.pts[i].norm();
      if (norm < threshold || norm == 0.0) {
        arcs.emplace_back(0.0, -1.0);  // never qualifies
        continue;
      }
      double centre = std::atan2(-w.pts[i][1], -w.pts[i][0]);  // direction of -p
      double half = std::acos(std::min(1.0, threshold / norm));
      arcs.emplace_back(centre, half);
      events.push_back(centre - half);
      events.push_back(centre + half);
      events.push_back(centre);
    }
    if (events.empty()) return 0.0;
    auto wrap = [&](double a) {
      while (a < 0.0) a += two_pi;
      while (a >= two_pi) a -= two_pi;
      return a;
    };
    for (double& e : events) e = wrap(e);
    std::sort(events.begin(), events.end());
    std::vector<double> probes;
    for (std::size_t i = 0; i < events.size(); ++i) {
      double a = events[i];
      double b = events[(i + 1) % events.size()];
      if (b < a) b += two_pi;
      probes.push_back(wrap(0.5 * (a + b)));
      probes.push_back(wrap(a + 1e-9));
      probes.push_back(wrap(a - 1e-9));
    }
    double best = std::numeric_limits<double>::infinity();
    for (double theta : probes) {
      double mass = 0.0;
      for (std::size_t i = 0; i < w.pts.size(); ++i) {
        if (arcs[i].second < 0.0) continue;
        double diff = std::abs(wrap(theta - arcs[i].first + two_pi));
        diff = std::min(diff, two_pi - diff);
        if (diff <= arcs[i].second) mass += w.mass[i];
      }
      best = std::min(best, mass);
    }
    return std::isfinite(best) ? best : 0.0;
  }
  double floor_mass = std::numeric_limits<double>::infinity();
  for (double p : w.mass) floor_mass = std::min(floor_mass, p);
  return floor_mass;
}

}  // namespace geom

namespace detail {

// Child increments of a node expressed in the coordinates of its linear
// support, with aggregated conditional masses.
inline geom::WeightedPoints support_coordinates(const FilteredTree& tree,
                                                const PriceModel& model, int node_id,
                                                const SupportEntry& entry) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> mass;
  for (int c : tree.node(node_id).children) {
    pts.push_back(entry.basis.transpose() * model.increment(c));
    mass.push_back(tree.node(c).cond_prob);
  }
  return geom::dedupe(pts, mass);
}

constexpr double kInRadiusTol = 1e-11;

}  // namespace detail

// One-step no-arbitrage at an internal node: the origin lies in the
// relative interior of the convex hull of the child increments.
inline bool one_step_na(const FilteredTree& tree, const PriceModel& model, int node_id) {
  SupportEntry entry = conditional_support(tree, model, node_id);
  if (entry.affine) return false;   // hull misses the origin outright
  if (entry.dim() == 0) return true;  // support {0}: no trade has any effect
  auto pts = detail::support_coordinates(tree, model, node_id, entry);
  return geom::in_radius(pts) > detail::kInRadiusTol;
}

struct NAReport {
  bool na = true;
  std::vector<int> violating_nodes;
};

// Multi-period no-arbitrage on a finite tree: one-step at every node.
inline NAReport na_check(const FilteredTree& tree, const PriceModel& model) {
  NAReport report;
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int id : tree.nodes_at_depth(t - 1))
      if (!one_step_na(tree, model, id)) {
        report.na = false;
        report.violating_nodes.push_back(id);
      }
  return report;
}

// The certified (beta, kappa) pair at a node. beta is the exact in-radius
// (sampled lower bound in dimension >= 4); kappa counts qualifying mass at
// the slightly shrunk threshold beta*(1-1e-9) so the tight children survive
// floating point evaluation.
inline std::pair<double, double> beta_kappa(const FilteredTree& tree, const PriceModel& model,
                                            int node_id, std::uint64_t seed = 0) {
  SupportEntry entry = conditional_support(tree, model, node_id);
  if (entry.dim() == 0 && !entry.affine)
    throw DegenerateSupport("support is {0} at node " + tree.node_path_label(node_id));
  if (entry.affine)
    throw ArbitrageAtNode("node " + tree.node_path_label(node_id));
  auto pts = detail::support_coordinates(tree, model, node_id, entry);
  double r = geom::in_radius(pts, seed);
  if (r <= detail::kInRadiusTol)
    throw ArbitrageAtNode("node " + tree.node_path_label(node_id));
  double kappa = geom::worst_direction_mass(pts, r * (1.0 - 1e-9));
  return {r, kappa};
}

// Certificates for every decision node; degenerate nodes get (+inf, 1).
inline NACertificate certificate(const FilteredTree& tree, const PriceModel& model,
                                 std::uint64_t seed = 0) {
  NACertificate cert;
  cert.na = true;
  cert.entries.resize(tree.horizon());
  for (int t = 1; t <= tree.horizon(); ++t) {
    for (int id : tree.nodes_at_depth(t - 1)) {
      SupportEntry entry = conditional_support(tree, model, id);
      NodeCertificate nc;
      nc.support_dim = entry.dim();
      if (!entry.affine && entry.dim() == 0) {
        nc.degenerate = true;
        nc.beta = std::numeric_limits<double>::infinity();
        nc.kappa = 1.0;
      } else if (entry.affine) {
        cert.na = false;
        nc.beta = 0.0;
        nc.kappa = 0.0;
        nc.support_dim = entry.dim() + 1;  // affine sets count their offset direction
      } else {
        auto pts = detail::support_coordinates(tree, model, id, entry);
        double r = geom::in_radius(pts, seed);
        if (r <= detail::kInRadiusTol) {
          cert.na = false;
          nc.beta = 0.0;
          nc.kappa = 0.0;
        } else {
          nc.beta = r;
          nc.kappa = geom::worst_direction_mass(pts, r * (1.0 - 1e-9));
        }
      }
      cert.entries[t - 1].push_back(nc);
    }
  }
  return cert;
}

// Robust no-arbitrage for the whole family, decided by LP: maximise the
// aggregate expected terminal gain from zero wealth subject to
// non-negative terminal wealth under every model, with the scale fixed by
// |phi|_inf <= 1. The condition holds iff the optimum is zero.
struct RobustNAResult {
  bool holds = true;
  double optimum = 0.0;
  Strategy witness;
};

inline RobustNAResult robust_na(const ModelFamily& family, double tol = 1e-9) {
  const FilteredTree& tree = family.t();
  StrategyLayout layout(tree, family.assets);

  // terminal gain of each (model, leaf) as a linear form over coordinates
  auto gain_row = [&](const PriceModel& model, int leaf) {
    std::vector<std::pair<int, double>> terms;
    for (int id : tree.path_to(leaf)) {
      const auto& n = tree.node(id);
      if (n.parent < 0) continue;
      for (int k = 0; k < family.assets; ++k) {
        double a = model.increment(id)[k];
        if (a != 0.0) terms.emplace_back(layout.coord(tree, n.depth, n.parent, k), a);
      }
    }
    std::sort(terms.begin(), terms.end());
    return terms;
  };

  std::vector<double> c(layout.total, 0.0);
  for (const PriceModel& model : family.models)
    for (int leaf : tree.leaves())
      for (const auto& [coord, a] : gain_row(model, leaf))
        c[coord] += tree.node(leaf).path_prob * a;

  DenseSimplex lp(c, std::vector<double>(layout.total, -1.0),
                  std::vector<double>(layout.total, 1.0));
  for (const PriceModel& model : family.models) {
    std::map<std::vector<std::pair<int, double>>, int> seen;
    for (int leaf : tree.leaves()) {
      LpRow row;
      row.sense = 'G';
      row.rhs = 0.0;
      row.terms = gain_row(model, leaf);
      if (seen.emplace(row.terms, leaf).second) lp.add_row(row);
    }
  }

  if (lp.solve() != LpStatus::Optimal)
    throw NumericFailure("robust no-arbitrage LP did not reach an optimum");

  RobustNAResult result;
  result.optimum = lp.objective_value();
  result.holds = result.optimum <= tol;
  result.witness = result.holds ? Strategy::zero(tree, family.assets)
                                : layout.unpack(tree, lp.solution());
  return result;
}

// Models that are arbitrage-free and whose supports contain every other
// model's supports node-wise. An empty list means the family has no
// qualifying reference model.
inline std::vector<std::string> assumption_na(const ModelFamily& family) {
  std::vector<std::string> stars;
  for (const PriceModel& m : family.models) {
    if (!na_check(family.t(), m).na) continue;
    if (check_containment(family, m.name).all) stars.push_back(m.name);
  }
  return stars;
}

// Recursive admissibility bounds: G_1 = w0/beta_1 at the root and
// G_{t+1} = (w0 + sum_{s<=t} G_s * |dS_s|) / beta_{t+1} along each path,
// with realised increment norms. Requires the model to be arbitrage-free.
inline BoundProcess g_bounds(const FilteredTree& tree, const PriceModel& model, double w0,
                             std::uint64_t seed = 0) {
  if (!(w0 > 0.0)) throw BadParameters("g_bounds needs w0 > 0");
  NACertificate cert = certificate(tree, model, seed);
  if (!cert.na) throw ArbitrageInModel(model.name);

  BoundProcess g;
  g.values.resize(tree.horizon());
  // path_sum[node] = sum of G_s * |dS_s| over the path down to `node`
  std::vector<double> path_sum(tree.node_count(), 0.0);
  for (int t = 1; t <= tree.horizon(); ++t) {
    const auto& nodes = tree.nodes_at_depth(t - 1);
    g.values[t - 1].resize(nodes.size());
    for (int id : nodes) {
      const auto& n = tree.node(id);
      const NodeCertificate& nc = cert.entries[t - 1][n.depth_index];
      double gt;
      if (nc.degenerate) {
        gt = std::numeric_limits<double>::infinity();  // projected position is 0, bound vacuous
      } else {
        gt = (w0 + path_sum[id]) / nc.beta;
      }
      g.values[t - 1][n.depth_index] = gt;
      for (int c : n.children) {
        double norm = model.increment(c).norm();
        // degenerate nodes contribute nothing: their increments are 0
        path_sum[c] = path_sum[id] + (norm > 0.0 ? gt * norm : 0.0);
      }
    }
  }
  return g;
}

}  // namespace rumax
