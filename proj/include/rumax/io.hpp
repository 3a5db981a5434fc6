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

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "rumax/errors.hpp"
#include "rumax/market.hpp"
#include "rumax/tree.hpp"

namespace rumax {

// Market files are JSON: {"horizon", "assets", "models": [{name, initial}],
// "root": node} where each non-root node carries "prob", "increments"
// (vectors keyed by model name) and "children". Numbers round-trip exactly
// through the serialiser's shortest-representation doubles.

namespace detail {

inline nlohmann::json node_to_json(const ModelFamily& family, int node_id) {
  const FilteredTree& tree = family.t();
  nlohmann::json j;
  const auto& n = tree.node(node_id);
  if (n.parent >= 0) {
    j["prob"] = n.cond_prob;
    nlohmann::json inc;
    for (const PriceModel& m : family.models) {
      std::vector<double> v(m.increment(node_id).data(),
                            m.increment(node_id).data() + m.dim());
      inc[m.name] = v;
    }
    j["increments"] = std::move(inc);
  }
  if (!n.children.empty()) {
    nlohmann::json children = nlohmann::json::array();
    for (int c : n.children) children.push_back(node_to_json(family, c));
    j["children"] = std::move(children);
  }
  return j;
}

struct ParsedNode {
  TreeSpec spec;
  // increments per model, aligned with a depth-first walk of the spec
  std::vector<std::vector<std::vector<double>>> increments_dfs;  // per model
};

inline void parse_node(const nlohmann::json& j, const std::string& path,
                       const std::vector<std::string>& model_names, bool is_root,
                       TreeSpec* spec,
                       std::vector<std::vector<std::vector<double>>>* increments) {
  if (!j.is_object()) throw SchemaError("node at " + path + " is not an object");
  if (!is_root) {
    if (!j.contains("prob") || !j["prob"].is_number())
      throw SchemaError("missing prob at " + path);
    spec->prob = j["prob"].get<double>();
    if (!j.contains("increments") || !j["increments"].is_object())
      throw SchemaError("missing increments at " + path);
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      const auto& inc = j["increments"];
      if (!inc.contains(model_names[m]))
        throw SchemaError("missing increment for model " + model_names[m] + " at " + path);
      if (!inc[model_names[m]].is_array())
        throw SchemaError("increment for model " + model_names[m] + " at " + path +
                          " is not an array");
      (*increments)[m].push_back(inc[model_names[m]].get<std::vector<double>>());
    }
  } else {
    // keep per-model slots aligned with the node walk
    for (std::size_t m = 0; m < model_names.size(); ++m)
      (*increments)[m].push_back({});
  }
  spec->label = path.substr(path.find_last_of('/') + 1);
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw SchemaError("children at " + path + " not an array");
    int idx = 0;
    for (const auto& cj : j["children"]) {
      TreeSpec child;
      parse_node(cj, path + "/" + std::to_string(idx), model_names, false, &child, increments);
      // child nodes were appended between the recursive call boundaries;
      // rebuild order below relies on the same walk
      spec->children.push_back(std::move(child));
      ++idx;
    }
  }
}

}  // namespace detail

inline void save_market(const ModelFamily& family, const std::string& path) {
  nlohmann::json j;
  j["horizon"] = family.t().horizon();
  j["assets"] = family.assets;
  nlohmann::json models = nlohmann::json::array();
  for (const PriceModel& m : family.models) {
    nlohmann::json mj;
    mj["name"] = m.name;
    mj["initial"] = std::vector<double>(m.initial.data(), m.initial.data() + m.dim());
    models.push_back(std::move(mj));
  }
  j["models"] = std::move(models);
  j["root"] = detail::node_to_json(family, 0);

  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IOError("short write to " + path);
}

inline ModelFamily load_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }

  for (const char* key : {"horizon", "assets", "models", "root"})
    if (!j.contains(key)) throw SchemaError(path + ": missing top-level key " + key);
  const int assets = j["assets"].get<int>();
  if (assets < 1) throw SchemaError("assets must be positive");

  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> initials;
  for (const auto& mj : j["models"]) {
    if (!mj.contains("name") || !mj.contains("initial"))
      throw SchemaError("model entries need name and initial");
    names.push_back(mj["name"].get<std::string>());
    auto vals = mj["initial"].get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != assets)
      throw SchemaError("initial price dimension of model " + names.back());
    initials.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  if (names.empty()) throw SchemaError("no models in " + path);

  TreeSpec spec;
  std::vector<std::vector<std::vector<double>>> inc(names.size());
  detail::parse_node(j["root"], "root", names, true, &spec, &inc);

  ModelFamily family;
  family.tree = make_tree(spec);
  family.assets = assets;
  const FilteredTree& tree = family.t();
  if (tree.horizon() != j["horizon"].get<int>())
    throw SchemaError("horizon field disagrees with the tree depth");

  // the parse walk and the canonical node order are both depth-first with
  // children in file order, so indices line up one to one
  for (std::size_t m = 0; m < names.size(); ++m) {
    PriceModel model;
    model.name = names[m];
    model.initial = initials[m];
    model.increments.resize(tree.node_count());
    if (static_cast<int>(inc[m].size()) != tree.node_count())
      throw SchemaError("node walk mismatch in " + path);
    for (int id = 1; id < tree.node_count(); ++id) {
      const auto& v = inc[m][id];
      if (static_cast<int>(v.size()) != assets)
        throw SchemaError("increment dimension for model " + names[m] + " at node " +
                          tree.node_path_label(id));
      model.increments[id] = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    }
    family.models.push_back(std::move(model));
  }
  family.validate();
  return family;
}

inline std::string market_to_string(const ModelFamily& family) {
  nlohmann::json j;
  j["horizon"] = family.t().horizon();
  j["assets"] = family.assets;
  nlohmann::json models = nlohmann::json::array();
  for (const PriceModel& m : family.models) {
    nlohmann::json mj;
    mj["name"] = m.name;
    mj["initial"] = std::vector<double>(m.initial.data(), m.initial.data() + m.dim());
    models.push_back(std::move(mj));
  }
  j["models"] = std::move(models);
  j["root"] = detail::node_to_json(family, 0);
  return j.dump(1);
}

}  // namespace rumax
