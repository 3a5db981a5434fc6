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
#include <string>
#include <utility>
#include <vector>

#include "rumax/errors.hpp"
#include "rumax/tree.hpp"

namespace rumax {

// One adapted R^d price process on a shared tree. Increments live on edges
// (one vector per non-root node); prices are derived, since the price change
// is the object every formula consumes.
struct PriceModel {
  std::string name;
  Eigen::VectorXd initial;                   // price vector at time 0
  std::vector<Eigen::VectorXd> increments;   // per node id; increments[root] unused

  int dim() const { return static_cast<int>(initial.size()); }

  const Eigen::VectorXd& increment(int node_id) const { return increments[node_id]; }

  Eigen::VectorXd price_at(const FilteredTree& tree, int node_id) const {
    Eigen::VectorXd p = initial;
    for (int n : tree.path_to(node_id))
      if (tree.node(n).parent >= 0) p += increments[n];
    return p;
  }

  void validate(const FilteredTree& tree) const {
    if (static_cast<int>(increments.size()) != tree.node_count())
      throw SizeMismatch("model " + name + ": increment count " +
                         std::to_string(increments.size()) + " != node count " +
                         std::to_string(tree.node_count()));
    for (int id = 1; id < tree.node_count(); ++id)
      if (increments[id].size() != initial.size())
        throw SizeMismatch("model " + name + ": increment dimension at node " +
                           tree.node_path_label(id));
  }
};

// A family of price models sharing one tree and one asset count.
struct ModelFamily {
  TreePtr tree;
  std::vector<PriceModel> models;
  int assets = 0;

  const FilteredTree& t() const { return *tree; }

  const PriceModel& model(const std::string& name) const {
    for (const PriceModel& m : models)
      if (m.name == name) return m;
    throw UnknownModel(name);
  }
  int model_index(const std::string& name) const {
    for (std::size_t i = 0; i < models.size(); ++i)
      if (models[i].name == name) return static_cast<int>(i);
    throw UnknownModel(name);
  }

  void validate() const {
    if (models.empty()) throw BadParameters("model family is empty");
    for (const PriceModel& m : models) {
      if (m.dim() != assets)
        throw SizeMismatch("model " + m.name + " has dimension " +
                           std::to_string(m.dim()));
      m.validate(*tree);
    }
  }
};

// A predictable R^d process: the position decided at time t-1 and held over
// period t, one vector per depth-(t-1) node. Indexing is values[t-1][node
// depth_index] for t in {1,...,T}.
struct Strategy {
  std::vector<std::vector<Eigen::VectorXd>> values;

  static Strategy zero(const FilteredTree& tree, int d) {
    Strategy s;
    s.values.resize(tree.horizon());
    for (int t = 1; t <= tree.horizon(); ++t)
      s.values[t - 1].assign(tree.nodes_at_depth(t - 1).size(),
                             Eigen::VectorXd::Zero(d));
    return s;
  }

  // Same vector at every node of each period; used for deterministic
  // strategies like the (1,1) example fixtures.
  static Strategy constant(const FilteredTree& tree, const std::vector<Eigen::VectorXd>& per_period) {
    if (static_cast<int>(per_period.size()) != tree.horizon())
      throw SizeMismatch("strategy needs one vector per period");
    Strategy s;
    s.values.resize(tree.horizon());
    for (int t = 1; t <= tree.horizon(); ++t)
      s.values[t - 1].assign(tree.nodes_at_depth(t - 1).size(), per_period[t - 1]);
    return s;
  }

  const Eigen::VectorXd& at(const FilteredTree& tree, int t, int node_id) const {
    return values[t - 1][tree.node(node_id).depth_index];
  }

  void check_shape(const FilteredTree& tree, int d) const {
    if (static_cast<int>(values.size()) != tree.horizon()) throw SizeMismatch("strategy depth");
    for (int t = 1; t <= tree.horizon(); ++t) {
      if (values[t - 1].size() != tree.nodes_at_depth(t - 1).size())
        throw SizeMismatch("strategy fan-out at period " + std::to_string(t));
      for (const auto& v : values[t - 1])
        if (v.size() != d) throw SizeMismatch("strategy dimension");
    }
  }
};

// The smallest affine set containing the conditional support of a price
// increment, attached to each (period, decision node). When the set is a
// linear subspace the basis spans it and `affine` is false; otherwise
// `offset` is the minimum-norm point of the affine set (orthogonal to the
// basis).
struct SupportEntry {
  Eigen::MatrixXd basis;     // d x k, orthonormal columns
  bool affine = false;
  Eigen::VectorXd offset;    // zero vector when linear

  int dim() const { return static_cast<int>(basis.cols()); }

  // Euclidean distance from v to the affine set offset + span(basis).
  double distance(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r = v - offset;
    if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
    return r.norm();
  }

  Eigen::VectorXd project(const Eigen::VectorXd& v) const {
    if (affine) throw AffineSupportNotLinear("projection needs a linear support");
    if (basis.cols() == 0) return Eigen::VectorXd::Zero(v.size());
    return basis * (basis.transpose() * v);
  }
};

// One SupportEntry per (period t, depth-(t-1) node).
struct SubspaceField {
  std::vector<std::vector<SupportEntry>> entries;  // entries[t-1][depth_index]

  const SupportEntry& at(const FilteredTree& tree, int t, int node_id) const {
    return entries[t - 1][tree.node(node_id).depth_index];
  }
};

namespace detail {
// Distance below which the origin is considered a member of an affine hull.
constexpr double kHullTol = 1e-9;
// Relative singular value threshold for rank decisions.
constexpr double kRankTol = 1e-10;
}  // namespace detail

// Affine hull of the child increments of an internal node: centre at the
// first child, rank-revealing orthonormal basis of the differences, then a
// membership test of the origin to decide linear vs affine.
inline SupportEntry conditional_support(const FilteredTree& tree, const PriceModel& model,
                                        int node_id) {
  const auto& children = tree.node(node_id).children;
  if (children.empty()) throw DepthOutOfRange("conditional support of a leaf");
  const int d = model.dim();
  const Eigen::VectorXd& first = model.increment(children.front());

  Eigen::MatrixXd diffs(d, static_cast<int>(children.size()) - 1);
  for (std::size_t c = 1; c < children.size(); ++c)
    diffs.col(static_cast<int>(c) - 1) = model.increment(children[c]) - first;

  SupportEntry entry;
  entry.offset = Eigen::VectorXd::Zero(d);
  if (diffs.cols() == 0) {
    entry.basis.resize(d, 0);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diffs, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double thresh = detail::kRankTol * (sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > thresh && sv[i] > 0.0) ++rank;
    entry.basis = svd.matrixU().leftCols(rank);
  }

  // residual of the first child against the direction space
  Eigen::VectorXd res = first;
  if (entry.basis.cols() > 0) res -= entry.basis * (entry.basis.transpose() * first);
  if (res.norm() <= detail::kHullTol) {
    entry.affine = false;  // 0 lies in the affine hull: report a linear subspace
  } else {
    entry.affine = true;
    entry.offset = res;
  }
  return entry;
}

inline SubspaceField support_field(const FilteredTree& tree, const PriceModel& model) {
  SubspaceField field;
  field.entries.resize(tree.horizon());
  for (int t = 1; t <= tree.horizon(); ++t) {
    const auto& nodes = tree.nodes_at_depth(t - 1);
    field.entries[t - 1].reserve(nodes.size());
    for (int id : nodes) field.entries[t - 1].push_back(conditional_support(tree, model, id));
  }
  return field;
}

// W_t = w0 + sum_{s<=t} <phi_s, dS_s> evaluated along every path.
inline AdaptedProcess wealth_process(const FilteredTree& tree, const PriceModel& model,
                                     double w0, const Strategy& phi) {
  phi.check_shape(tree, model.dim());
  AdaptedProcess w = AdaptedProcess::zeros(tree);
  w.values[0][0] = w0;
  for (int t = 1; t <= tree.horizon(); ++t) {
    for (int id : tree.nodes_at_depth(t)) {
      const auto& n = tree.node(id);
      const auto& parent = tree.node(n.parent);
      w.values[t][n.depth_index] =
          w.values[t - 1][parent.depth_index] +
          phi.values[t - 1][parent.depth_index].dot(model.increments[id]);
    }
  }
  return w;
}

inline RandomVariable terminal_wealth(const FilteredTree& tree, const PriceModel& model,
                                      double w0, const Strategy& phi) {
  AdaptedProcess w = wealth_process(tree, model, w0, phi);
  std::vector<double> out(tree.leaf_count());
  for (int leaf_id : tree.leaves())
    out[tree.node(leaf_id).leaf_index] = w.values[tree.horizon()][tree.node(leaf_id).depth_index];
  return RandomVariable(std::move(out));
}

// Node-wise orthogonal projection of the strategy onto the field's linear
// subspaces. Projecting never changes any wealth value as long as the
// model's supports are contained in the field. An affine entry signals
// one-step arbitrage at that node and is rejected.
inline Strategy project_strategy(const FilteredTree& tree, const Strategy& phi,
                                 const SubspaceField& field) {
  Strategy out = phi;
  for (int t = 1; t <= tree.horizon(); ++t) {
    for (std::size_t i = 0; i < out.values[t - 1].size(); ++i) {
      const SupportEntry& e = field.entries[t - 1][i];
      if (e.affine)
        throw AffineSupportNotLinear("support at period " + std::to_string(t) +
                                     ", node " + std::to_string(i));
      out.values[t - 1][i] = e.project(phi.values[t - 1][i]);
    }
  }
  return out;
}

// Flat indexing of strategy coordinates for LP columns: periods ascending,
// nodes in canonical order within a period, assets innermost.
struct StrategyLayout {
  int horizon = 0;
  int d = 0;
  std::vector<int> offsets;  // per period t-1: first coordinate of that period
  int total = 0;

  StrategyLayout() = default;
  StrategyLayout(const FilteredTree& tree, int assets) : horizon(tree.horizon()), d(assets) {
    offsets.resize(horizon);
    for (int t = 1; t <= horizon; ++t) {
      offsets[t - 1] = total;
      total += static_cast<int>(tree.nodes_at_depth(t - 1).size()) * d;
    }
  }

  int coord(const FilteredTree& tree, int t, int node_id, int k) const {
    return offsets[t - 1] + tree.node(node_id).depth_index * d + k;
  }

  Strategy unpack(const FilteredTree& tree, const std::vector<double>& x) const {
    Strategy s = Strategy::zero(tree, d);
    for (int t = 1; t <= horizon; ++t)
      for (std::size_t i = 0; i < s.values[t - 1].size(); ++i)
        for (int k = 0; k < d; ++k)
          s.values[t - 1][i][k] = x[offsets[t - 1] + static_cast<int>(i) * d + k];
    return s;
  }

  std::vector<double> pack(const FilteredTree& tree, const Strategy& s) const {
    std::vector<double> x(total, 0.0);
    for (int t = 1; t <= horizon; ++t)
      for (std::size_t i = 0; i < s.values[t - 1].size(); ++i)
        for (int k = 0; k < d; ++k)
          x[offsets[t - 1] + static_cast<int>(i) * d + k] = s.values[t - 1][i][k];
    return x;
  }
};

// Containment report for D_t^S inside D_t^{star} at every decision node.
struct ContainmentReport {
  struct Entry {
    std::string model;
    int period;
    int node_id;
    bool contained;
  };
  std::vector<Entry> entries;
  bool all = true;
};

// True at a node iff every child increment of S lies in the affine support
// of the star model there, within the hull tolerance.
inline ContainmentReport check_containment(const ModelFamily& family,
                                           const std::string& star) {
  const FilteredTree& tree = family.t();
  const PriceModel& star_model = family.model(star);
  SubspaceField star_field = support_field(tree, star_model);

  ContainmentReport report;
  for (const PriceModel& m : family.models) {
    for (int t = 1; t <= tree.horizon(); ++t) {
      for (int id : tree.nodes_at_depth(t - 1)) {
        const SupportEntry& target = star_field.at(tree, t, id);
        bool ok = true;
        for (int c : tree.node(id).children)
          if (target.distance(m.increment(c)) > detail::kHullTol) {
            ok = false;
            break;
          }
        report.entries.push_back({m.name, t, id, ok});
        report.all = report.all && ok;
      }
    }
  }
  return report;
}

}  // namespace rumax
