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
#include <vector>

#include "rumax/generators.hpp"
#include "rumax/market.hpp"
#include "rumax/rng.hpp"
#include "rumax/tree.hpp"

namespace rumax::testing {

inline Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd x(1);
  x[0] = v;
  return x;
}

inline Eigen::VectorXd vec2(double a, double b) {
  Eigen::Vector2d x(a, b);
  return x;
}

// The symmetric one-step coin flip: increments {+1, -1} with probability
// 1/2 each.
inline ModelFamily coin_family() { return bachelier_family(1, 0.5, 0.0, {{1.0, 0.0}}); }

// One-step family with explicit increments per child (probabilities
// uniform unless given).
inline ModelFamily one_step_family(const std::vector<std::vector<Eigen::VectorXd>>& increments,
                                   std::vector<double> probs = {}) {
  const std::size_t branches = increments.front().size();
  if (probs.empty()) probs.assign(branches, 1.0 / static_cast<double>(branches));
  TreeSpec root;
  for (std::size_t i = 0; i < branches; ++i) {
    TreeSpec leaf;
    leaf.prob = probs[i];
    root.children.push_back(leaf);
  }
  ModelFamily family;
  family.tree = make_tree(root);
  family.assets = static_cast<int>(increments.front().front().size());
  for (std::size_t m = 0; m < increments.size(); ++m) {
    PriceModel model;
    model.name = "m" + std::to_string(m);
    model.initial = Eigen::VectorXd::Zero(family.assets);
    model.increments.resize(family.tree->node_count());
    for (std::size_t i = 0; i < branches; ++i)
      model.increments[1 + i] = increments[m][i];
    family.models.push_back(std::move(model));
  }
  family.validate();
  return family;
}

// Random small trees and models for property suites: depth <= 3, up to 4
// children per node, increments on a half-integer grid so that boundary
// cases are exact rather than borderline.
inline TreeSpec random_tree_spec(Rng& rng, int depth_left, int max_children) {
  TreeSpec node;
  if (depth_left == 0) return node;
  int n = rng.uniform_int(2, max_children);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.uniform_int(1, 4);
    sum += v;
  }
  for (int i = 0; i < n; ++i) {
    TreeSpec child = random_tree_spec(rng, depth_left - 1, max_children);
    child.prob = w[i] / sum;
    node.children.push_back(child);
  }
  return node;
}

inline ModelFamily random_family(Rng& rng, int max_depth = 3, int max_children = 4,
                                 int max_d = 2, int n_models = 1) {
  int T = rng.uniform_int(1, max_depth);
  int d = rng.uniform_int(1, max_d);
  TreePtr tree = make_tree(random_tree_spec(rng, T, max_children));
  ModelFamily family;
  family.tree = tree;
  family.assets = d;
  for (int m = 0; m < n_models; ++m) {
    PriceModel model;
    model.name = "m" + std::to_string(m);
    model.initial = Eigen::VectorXd::Zero(d);
    model.increments.resize(tree->node_count());
    for (int id = 1; id < tree->node_count(); ++id) {
      Eigen::VectorXd inc(d);
      for (int k = 0; k < d; ++k) inc[k] = 0.5 * rng.uniform_int(-4, 4);
      model.increments[id] = inc;
    }
    family.models.push_back(std::move(model));
  }
  family.validate();
  return family;
}

}  // namespace rumax::testing
