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

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rumax/errors.hpp"

namespace rumax {

// Node description used to build a FilteredTree. `prob` is the conditional
// branch probability of reaching this node from its parent (ignored at the
// root). `label` is optional and only used to make validation errors
// point at a node path in scenario files.
struct TreeSpec {
  double prob = 1.0;
  std::vector<TreeSpec> children;
  std::string label;
};

// A finite filtered probability space represented as a rooted scenario tree
// of uniform depth. Depth-t nodes are the atoms of the time-t information
// sigma-algebra; the filtration itself never needs to be materialised.
//
// Canonical order: nodes are indexed depth-first with children in spec
// order. All per-node and per-leaf vectors in the library use this order,
// which keeps file I/O and LP column ordering deterministic.
//
// Immutable after build; all member functions are const and the type is safe
// for concurrent reads.
class FilteredTree {
 public:
  struct Node {
    int parent = -1;
    int depth = 0;
    double cond_prob = 1.0;   // conditional probability of the edge into this node
    double path_prob = 1.0;   // unconditional probability of the node's atom
    std::vector<int> children;
    int depth_index = 0;      // index among the nodes of the same depth
    int leaf_index = -1;      // index among leaves, -1 for internal nodes
    std::string label;
  };

  static constexpr double kProbTol = 1e-12;

  // Validates the spec and builds the tree. Branch probabilities are
  // validated to kProbTol and then renormalised exactly once, so later
  // arithmetic never sees the validation slack.
  static FilteredTree build(const TreeSpec& spec) {
    FilteredTree tree;
    tree.append(spec, /*parent=*/-1, /*depth=*/0, /*cond_prob=*/1.0, "root");
    tree.finalize();
    return tree;
  }

  int horizon() const { return horizon_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int leaf_count() const { return static_cast<int>(levels_.back().size()); }
  const Node& node(int id) const { return nodes_[id]; }
  const std::vector<int>& nodes_at_depth(int t) const {
    if (t < 0 || t > horizon_) throw DepthOutOfRange("depth " + std::to_string(t));
    return levels_[t];
  }
  const std::vector<int>& leaves() const { return levels_[horizon_]; }
  bool is_leaf(int id) const { return nodes_[id].children.empty(); }

  // Leaf ids of the subtree rooted at `id`, in canonical order. Precomputed
  // ranges would do; the explicit walk keeps the structure obvious.
  void collect_leaves(int id, std::vector<int>* out) const {
    if (is_leaf(id)) {
      out->push_back(id);
      return;
    }
    for (int c : nodes_[id].children) collect_leaves(c, out);
  }

  // [first, last) range of leaf indices under node `id` (leaves of a subtree
  // are contiguous in canonical order).
  std::pair<int, int> leaf_range(int id) const { return leaf_ranges_[id]; }

  // Path of node ids root -> ... -> id.
  std::vector<int> path_to(int id) const {
    std::vector<int> path;
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent) path.push_back(cur);
    return {path.rbegin(), path.rend()};
  }

  std::string node_path_label(int id) const {
    std::string out;
    for (int n : path_to(id)) {
      if (!out.empty()) out += '/';
      out += nodes_[n].label;
    }
    return out;
  }

 private:
  void append(const TreeSpec& spec, int parent, int depth, double cond_prob,
              const std::string& label) {
    Node n;
    n.parent = parent;
    n.depth = depth;
    n.cond_prob = cond_prob;
    n.label = label;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    if (parent >= 0) nodes_[parent].children.push_back(id);

    if (!spec.children.empty()) {
      double sum = 0.0;
      for (const TreeSpec& c : spec.children) {
        if (!(c.prob > 0.0))
          throw NonPositiveProbability("prob " + std::to_string(c.prob) + " at node " +
                                       pending_path(id, label));
        sum += c.prob;
      }
      if (std::abs(sum - 1.0) > kProbTol)
        throw ProbabilitySumViolation("children of node " + pending_path(id, label) +
                                      " sum to " + std::to_string(sum));
      for (std::size_t k = 0; k < spec.children.size(); ++k) {
        const TreeSpec& c = spec.children[k];
        std::string child_label = c.label.empty() ? std::to_string(k) : c.label;
        append(c, id, depth + 1, c.prob / sum, child_label);
      }
    }
  }

  std::string pending_path(int id, const std::string& label) const {
    std::string out;
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent) {
      out = nodes_[cur].label + (out.empty() ? "" : "/" + out);
    }
    return out.empty() ? label : out;
  }

  void finalize() {
    horizon_ = 0;
    for (const Node& n : nodes_)
      if (n.children.empty()) horizon_ = std::max(horizon_, n.depth);
    if (horizon_ < 1) throw NonUniformDepth("tree must have horizon >= 1");
    for (const Node& n : nodes_)
      if (n.children.empty() && n.depth != horizon_)
        throw NonUniformDepth("leaf at depth " + std::to_string(n.depth) +
                              " in a tree of depth " + std::to_string(horizon_));

    levels_.assign(horizon_ + 1, {});
    leaf_ranges_.assign(nodes_.size(), {0, 0});
    double leaf_mass = 0.0;
    for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
      Node& n = nodes_[id];
      n.path_prob = (n.parent < 0) ? 1.0 : nodes_[n.parent].path_prob * n.cond_prob;
      n.depth_index = static_cast<int>(levels_[n.depth].size());
      levels_[n.depth].push_back(id);
      if (n.children.empty()) {
        n.leaf_index = static_cast<int>(levels_[horizon_].size()) - 1;
        leaf_mass += n.path_prob;
      }
    }
    if (std::abs(leaf_mass - 1.0) > kProbTol)
      throw ProbabilitySumViolation("leaf masses sum to " + std::to_string(leaf_mass));

    // leaf ranges, computed bottom-up in reverse canonical order
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
      const Node& n = nodes_[id];
      if (n.children.empty()) {
        leaf_ranges_[id] = {n.leaf_index, n.leaf_index + 1};
      } else {
        leaf_ranges_[id] = {leaf_ranges_[n.children.front()].first,
                            leaf_ranges_[n.children.back()].second};
      }
    }
  }

  int horizon_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::vector<int>> levels_;
  std::vector<std::pair<int, int>> leaf_ranges_;
};

using TreePtr = std::shared_ptr<const FilteredTree>;

inline TreePtr make_tree(const TreeSpec& spec) {
  return std::make_shared<const FilteredTree>(FilteredTree::build(spec));
}

// A scalar random variable: one value per leaf, canonical leaf order.
struct RandomVariable {
  std::vector<double> values;

  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> v) : values(std::move(v)) {}
  static RandomVariable constant(const FilteredTree& tree, double c) {
    return RandomVariable(std::vector<double>(tree.leaf_count(), c));
  }
  double operator[](int leaf) const { return values[leaf]; }
  int size() const { return static_cast<int>(values.size()); }
};

// A real-valued adapted process: one value per node of each depth.
struct AdaptedProcess {
  std::vector<std::vector<double>> values;  // values[t][depth_index]

  static AdaptedProcess zeros(const FilteredTree& tree) {
    AdaptedProcess p;
    p.values.resize(tree.horizon() + 1);
    for (int t = 0; t <= tree.horizon(); ++t)
      p.values[t].assign(tree.nodes_at_depth(t).size(), 0.0);
    return p;
  }
  double at(const FilteredTree& tree, int node_id) const {
    const auto& n = tree.node(node_id);
    return values[n.depth][n.depth_index];
  }
};

// A probability measure on the leaves. `equivalent()` is full support,
// which on a finite space is exactly equivalence to the reference measure.
struct Measure {
  std::vector<double> weights;

  Measure() = default;
  explicit Measure(std::vector<double> w, bool validate = true) : weights(std::move(w)) {
    if (validate) check();
  }

  static Measure reference(const FilteredTree& tree) {
    std::vector<double> w(tree.leaf_count());
    for (int leaf_id : tree.leaves())
      w[tree.node(leaf_id).leaf_index] = tree.node(leaf_id).path_prob;
    return Measure(std::move(w), /*validate=*/false);
  }

  void check() const {
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw NonPositiveProbability("negative measure weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > FilteredTree::kProbTol)
      throw ProbabilitySumViolation("measure weights sum to " + std::to_string(sum));
  }

  bool equivalent() const {
    for (double w : weights)
      if (!(w > 0.0)) return false;
    return true;
  }
  int size() const { return static_cast<int>(weights.size()); }
};

// E_q[x]; plain left-to-right accumulation in canonical leaf order so the
// result is reproducible bit for bit.
inline double expectation(const RandomVariable& x, const Measure& q) {
  if (x.size() != q.size())
    throw SizeMismatch("random variable has " + std::to_string(x.size()) +
                       " values, measure has " + std::to_string(q.size()));
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) acc += q.weights[i] * x.values[i];
  return acc;
}

inline double expectation(const FilteredTree& tree, const RandomVariable& x) {
  return expectation(x, Measure::reference(tree));
}

// E_q[x | F_t] as one value per depth-t node: the q-weighted average of x
// over the node's subtree, normalised by the subtree's q-mass.
inline std::vector<double> conditional_expectation(const FilteredTree& tree,
                                                   const RandomVariable& x, int t,
                                                   const Measure& q) {
  if (x.size() != tree.leaf_count()) throw SizeMismatch("random variable size");
  if (q.size() != tree.leaf_count()) throw SizeMismatch("measure size");
  if (t < 0 || t > tree.horizon()) throw DepthOutOfRange(std::to_string(t));
  const auto& nodes = tree.nodes_at_depth(t);
  std::vector<double> out(nodes.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto [lo, hi] = tree.leaf_range(nodes[i]);
    double mass = 0.0, acc = 0.0;
    for (int leaf = lo; leaf < hi; ++leaf) {
      mass += q.weights[leaf];
      acc += q.weights[leaf] * x.values[leaf];
    }
    if (!(mass > 0.0)) throw BaseNotFullSupport("zero mass subtree in conditioning");
    out[i] = acc / mass;
  }
  return out;
}

inline std::vector<double> conditional_expectation(const FilteredTree& tree,
                                                   const RandomVariable& x, int t) {
  return conditional_expectation(tree, x, t, Measure::reference(tree));
}

}  // namespace rumax
