#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctree/detail/format.hpp"
#include "ctree/tree.hpp"

namespace ctree {

enum class TreeFormat { structured, graph };

namespace detail {

inline nlohmann::json node_to_json(const CollisionTree& tree, std::size_t pos) {
  const TreeNode& n = tree.node(pos);
  nlohmann::json rec;
  rec["node_id"] = n.id;
  rec["prob"] = n.prob;
  rec["pilot_label"] = n.pilot_label == kUnlabeled ? nlohmann::json(nullptr)
                                                   : nlohmann::json(n.pilot_label);
  if (n.alarm) rec["alarm_id"] = *n.alarm;
  rec["children"] = nlohmann::json::array();
  for (std::size_t c : n.children) rec["children"].push_back(node_to_json(tree, c));
  return rec;
}

inline std::string to_dot(const CollisionTree& tree) {
  std::string out = "digraph collision_tree {\n  node [shape=circle];\n";
  char prob[32];
  for (const TreeNode& n : tree.nodes()) {
    std::snprintf(prob, sizeof prob, "%.3g", n.prob);
    const std::string pilot =
        n.pilot_label == kUnlabeled ? std::string("?") : std::to_string(n.pilot_label);
    out += "  n" + std::to_string(n.id) + " [label=\"\xCF\x80=" + prob + " / pilot=" + pilot +
           "\"";
    if (n.alarm) out += ", style=filled, fillcolor=grey, xlabel=\"a" + std::to_string(*n.alarm) + "\"";
    out += "];\n";
  }
  for (const TreeNode& n : tree.nodes())
    for (std::size_t c : n.children)
      out += "  n" + std::to_string(n.id) + " -> n" + std::to_string(tree.node(c).id) + ";\n";
  out += "}\n";
  return out;
}

inline std::size_t parse_node(const nlohmann::json& rec, const std::string& where, Draft& d,
                              std::size_t parent, std::vector<double>& stated_prob) {
  if (!rec.is_object()) throw ParseError(where + ": expected an object");
  if (!rec.contains("node_id") || !rec["node_id"].is_number_integer())
    throw ParseError(where + ".node_id: expected an integer");
  if (!rec.contains("prob") || !rec["prob"].is_number())
    throw ParseError(where + ".prob: expected a number");
  if (!rec.contains("children") || !rec["children"].is_array())
    throw ParseError(where + ".children: expected an array");

  DraftNode n;
  n.id = rec["node_id"].get<NodeId>();
  n.parent = parent;
  const double prob = rec["prob"].get<double>();
  if (!(prob >= 0.0 && prob <= 1.0)) throw ValidationError(where + ".prob: outside [0,1]");
  n.leaf_prob = prob;
  if (rec.contains("pilot_label") && !rec["pilot_label"].is_null()) {
    if (!rec["pilot_label"].is_number_integer() || rec["pilot_label"].get<int>() < 0)
      throw ParseError(where + ".pilot_label: expected a non-negative integer or null");
    n.pilot_label = rec["pilot_label"].get<int>();
  }
  if (rec.contains("alarm_id") && !rec["alarm_id"].is_null()) {
    if (!rec["alarm_id"].is_number_integer())
      throw ParseError(where + ".alarm_id: expected an integer");
    n.alarm = rec["alarm_id"].get<AlarmId>();
  }
  const auto& kids = rec["children"];
  if (kids.size() == 1)
    throw ValidationError(where + ": internal node " + std::to_string(n.id) +
                          " has a single child");

  const std::size_t pos = d.nodes.size();
  d.nodes.push_back(n);
  stated_prob.push_back(prob);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    const std::size_t c =
        parse_node(kids[i], where + ".children[" + std::to_string(i) + "]", d, pos, stated_prob);
    d.nodes[pos].children.push_back(c);
  }
  return pos;
}

}  // namespace detail

inline std::string serialize_tree(const CollisionTree& tree,
                                  TreeFormat format = TreeFormat::structured) {
  if (format == TreeFormat::graph) return detail::to_dot(tree);
  return detail::node_to_json(tree, CollisionTree::root_pos()).dump(2) + "\n";
}

/// Parses the structured format. Rejects unary internal nodes, duplicate ids,
/// internal probabilities inconsistent with their leaves, and pilot labels
/// that are not a per-level 1..width bijection under a root labeled 0.
inline CollisionTree deserialize_tree(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("tree: ") + e.what());
  }
  detail::Draft d;
  std::vector<double> stated;
  d.root = detail::parse_node(doc, "root", d, kNoNode, stated);

  std::map<NodeId, double> stated_by_id;
  for (std::size_t i = 0; i < d.nodes.size(); ++i)
    if (!stated_by_id.emplace(d.nodes[i].id, stated[i]).second)
      throw ValidationError("duplicate node id " + std::to_string(d.nodes[i].id));

  CollisionTree tree = CollisionTree::from_draft(d);
  for (const TreeNode& n : tree.nodes()) {
    if (std::abs(stated_by_id.at(n.id) - n.prob) > 1e-9)
      throw ValidationError("node " + std::to_string(n.id) +
                            ": prob is inconsistent with its leaf probabilities");
  }

  const bool any_label = std::any_of(d.nodes.begin(), d.nodes.end(), [](const auto& n) {
    return n.pilot_label != kUnlabeled;
  });
  if (any_label) {
    std::vector<std::set<int>> per_level(static_cast<std::size_t>(tree.depth()));
    for (const TreeNode& n : tree.nodes()) {
      if (n.pilot_label == kUnlabeled)
        throw ValidationError("node " + std::to_string(n.id) + ": missing pilot_label");
      if (n.is_root() && n.pilot_label != kCommonPilot)
        throw ValidationError("root must carry the common pilot 0");
      if (!n.is_root() && n.pilot_label < 1)
        throw ValidationError("node " + std::to_string(n.id) + ": pilot_label must be >= 1");
      if (!per_level[static_cast<std::size_t>(n.level)].insert(n.pilot_label).second)
        throw ValidationError("pilot " + std::to_string(n.pilot_label) + " repeated on level " +
                              std::to_string(n.level));
    }
    for (std::size_t level = 1; level < per_level.size(); ++level)
      if (*per_level[level].rbegin() != static_cast<int>(per_level[level].size()))
        throw ValidationError("pilot labels on level " + std::to_string(level) +
                              " are not contiguous from 1");
  }
  return tree;
}

}  // namespace ctree
