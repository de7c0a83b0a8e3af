#pragma once

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctree/tree.hpp"

namespace ctree {

/// Whether the collision term of the root (the common pilot) counts toward
/// expected delivery time. root_inclusive matches the slot-by-slot replay;
/// paper_literal drops the root term.
enum class DeliveryVariant { root_inclusive, paper_literal };

inline std::string to_string(DeliveryVariant v) {
  return v == DeliveryVariant::root_inclusive ? "root_inclusive" : "paper_literal";
}

inline DeliveryVariant parse_delivery_variant(const std::string& s) {
  if (s == "root_inclusive") return DeliveryVariant::root_inclusive;
  if (s == "paper_literal") return DeliveryVariant::paper_literal;
  throw ConfigError("unknown delivery variant '" + s + "'");
}

/// P(two or more alarms under the node trigger in the same slot). Zero on
/// leaves.
inline double collision_prob(const CollisionTree& tree, std::size_t pos) {
  if (tree.node(pos).is_leaf()) return 0.0;
  // Track P(none), P(exactly one), P(two or more) leaf by leaf.
  double none = 1.0, one = 0.0, many = 0.0;
  for (double p : tree.leaf_probs_under(pos)) {
    many += one * p;
    one = one * (1.0 - p) + none * p;
    none *= 1.0 - p;
  }
  return many;
}

/// P(collision at the node | alarm triggered) = 1 - prod over the node's
/// other leaves of (1 - p).
inline double conditional_collision_prob(const CollisionTree& tree, std::size_t pos,
                                         AlarmId alarm) {
  const std::size_t leaf = tree.leaf_pos(alarm);
  if (!tree.is_ancestor_or_self(pos, leaf))
    throw DomainError("alarm " + std::to_string(alarm) + " is not under node " +
                      std::to_string(tree.node(pos).id));
  if (pos == leaf) return 0.0;
  std::vector<double> others;
  for (std::size_t l : tree.leaves_under(pos))
    if (l != leaf) others.push_back(tree.node(l).prob);
  return 1.0 - complement_product(others);
}

inline double expected_delivery_time(const CollisionTree& tree, AlarmId alarm,
                                     DeliveryVariant variant = DeliveryVariant::root_inclusive) {
  double slots = 1.0;
  for (std::size_t u : tree.ancestors(tree.leaf_pos(alarm))) {
    if (variant == DeliveryVariant::paper_literal && tree.node(u).is_root()) continue;
    slots += conditional_collision_prob(tree, u, alarm);
  }
  return slots;
}

inline double average_delivery_time(const CollisionTree& tree,
                                    DeliveryVariant variant = DeliveryVariant::root_inclusive) {
  if (tree.num_alarms() == 0) throw ValidationError("average_delivery_time: empty tree");
  double sum = 0.0;
  for (const auto& [alarm, pos] : tree.leaf_map()) sum += expected_delivery_time(tree, alarm, variant);
  return sum / static_cast<double>(tree.num_alarms());
}

/// A-priori expected pilots per slot with every alarm armed: the common pilot
/// plus one pilot per child of each colliding node.
inline double expected_pilots_per_slot(const CollisionTree& tree) {
  if (tree.size() == 0) throw ValidationError("expected_pilots_per_slot: empty tree");
  double pilots = 1.0;
  for (std::size_t u = 0; u < tree.size(); ++u) {
    const TreeNode& n = tree.node(u);
    if (!n.is_leaf()) pilots += collision_prob(tree, u) * static_cast<double>(n.children.size());
  }
  return pilots;
}

struct AnalysisReport {
  DeliveryVariant variant = DeliveryVariant::root_inclusive;
  std::map<AlarmId, double> expected_delivery;
  double average_delivery = 1.0;
  double expected_pilots_per_slot = 1.0;
  std::map<NodeId, double> collision_prob;
};

inline AnalysisReport analyze(const CollisionTree& tree,
                              DeliveryVariant variant = DeliveryVariant::root_inclusive) {
  AnalysisReport r;
  r.variant = variant;
  double sum = 0.0;
  for (const auto& [alarm, pos] : tree.leaf_map()) {
    const double e = expected_delivery_time(tree, alarm, variant);
    r.expected_delivery[alarm] = e;
    sum += e;
  }
  r.average_delivery = sum / static_cast<double>(tree.num_alarms());
  r.expected_pilots_per_slot = expected_pilots_per_slot(tree);
  for (std::size_t u = 0; u < tree.size(); ++u)
    r.collision_prob[tree.node(u).id] = collision_prob(tree, u);
  return r;
}

inline nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json doc;
  doc["variant"] = to_string(r.variant);
  doc["expected_delivery"] = nlohmann::json::object();
  for (const auto& [alarm, v] : r.expected_delivery) doc["expected_delivery"][std::to_string(alarm)] = v;
  doc["average_delivery"] = r.average_delivery;
  doc["expected_pilots_per_slot"] = r.expected_pilots_per_slot;
  doc["collision_prob"] = nlohmann::json::object();
  for (const auto& [node, v] : r.collision_prob) doc["collision_prob"][std::to_string(node)] = v;
  return doc;
}

}  // namespace ctree
