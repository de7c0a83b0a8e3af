#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctree/alarm.hpp"
#include "ctree/tree.hpp"

namespace ctree {

inline constexpr std::size_t kOracleMaxAlarms = 20;

/// Replay of one batch of alarms that all first transmit in the same slot.
struct BatchOutcome {
  std::set<AlarmId> subset;
  std::map<AlarmId, int> delivery_time;
  // Index 0 is the initial slot (the common pilot); index k > 0 counts the
  // pilots reserved for the batch in the k-th slot after it.
  std::vector<int> pilots_by_slot;

  int total_pilots() const {
    int total = 0;
    for (int p : pilots_by_slot) total += p;
    return total;
  }
};

namespace detail {

using PathMap = std::map<AlarmId, std::vector<std::size_t>>;

inline PathMap root_paths(const CollisionTree& tree) {
  PathMap paths;
  for (const auto& [alarm, leaf] : tree.leaf_map()) paths[alarm] = tree.path_from_root(leaf);
  return paths;
}

inline BatchOutcome replay_batch(const CollisionTree& tree, const PathMap& path,
                                 const std::set<AlarmId>& subset) {
  BatchOutcome out;
  out.subset = subset;
  out.pilots_by_slot.push_back(1);
  if (subset.size() == 1) out.delivery_time[*subset.begin()] = 1;
  if (subset.size() <= 1) return out;

  // Groups of still-colliding alarms keyed by the node they collided on.
  std::map<std::size_t, std::vector<AlarmId>> colliding{
      {CollisionTree::root_pos(), {subset.begin(), subset.end()}}};
  for (int slot = 2; !colliding.empty(); ++slot) {
    int reserved = 0;
    std::map<std::size_t, std::vector<AlarmId>> next;
    for (const auto& [node, group] : colliding) {
      reserved += static_cast<int>(tree.node(node).children.size());
      const auto depth = static_cast<std::size_t>(tree.node(node).level) + 1;
      std::map<std::size_t, std::vector<AlarmId>> on_child;
      for (AlarmId a : group) on_child[path.at(a)[depth]].push_back(a);
      for (auto& [child, members] : on_child) {
        if (members.size() == 1)
          out.delivery_time[members.front()] = slot;
        else
          next[child] = std::move(members);
      }
    }
    out.pilots_by_slot.push_back(reserved);
    colliding = std::move(next);
  }
  return out;
}

}  // namespace detail

/// Slot-by-slot replay written directly against root-to-leaf paths. A node
/// that carried two or more transmitters in slot k reserves one pilot per
/// child in slot k + 1; a child with a lone transmitter delivers it.
inline BatchOutcome resolve_batch(const CollisionTree& tree, const std::set<AlarmId>& subset) {
  for (AlarmId a : subset)
    if (!tree.has_alarm(a))
      throw DomainError("resolve_batch: alarm " + std::to_string(a) + " is not in the tree");
  return detail::replay_batch(tree, detail::root_paths(tree), subset);
}

struct ExactMetrics {
  std::map<AlarmId, double> expected_delivery;  // conditioned on the alarm triggering
  double expected_resolution_pilots = 0.0;
  std::map<NodeId, double> node_collision_prob;
};

/// Exact expectations over all 2^n single-slot trigger subsets.
inline ExactMetrics exact_metrics(const CollisionTree& tree, const AlarmSet& alarms) {
  const std::size_t n = alarms.size();
  if (n > kOracleMaxAlarms)
    throw SizeError("exact_metrics: " + std::to_string(n) + " alarms exceeds the cap of " +
                    std::to_string(kOracleMaxAlarms));
  if (n != tree.num_alarms()) throw ValidationError("exact_metrics: alarm set does not match tree");
  std::vector<AlarmId> ids;
  std::vector<double> p;
  for (const AlarmSource& a : alarms) {
    if (!tree.has_alarm(a.id))
      throw ValidationError("exact_metrics: alarm " + std::to_string(a.id) + " is not in the tree");
    ids.push_back(a.id);
    p.push_back(a.trigger_prob);
  }

  // Leaf membership of every internal node as a bitmask over alarm indices.
  std::vector<std::uint32_t> under(tree.size(), 0);
  for (std::size_t u = 0; u < tree.size(); ++u)
    for (std::size_t l : tree.leaves_under(u)) {
      const AlarmId a = *tree.node(l).alarm;
      const auto idx = static_cast<std::size_t>(
          std::lower_bound(ids.begin(), ids.end(), a) - ids.begin());
      under[u] |= std::uint32_t{1} << idx;
    }

  const detail::PathMap paths = detail::root_paths(tree);
  ExactMetrics m;
  std::vector<double> delivery(n, 0.0), collide(tree.size(), 0.0);
  std::vector<double> factor(n), prefix(n + 1), suffix(n + 1);
  const std::uint32_t subsets = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    for (std::size_t i = 0; i < n; ++i) factor[i] = (mask >> i & 1U) ? p[i] : 1.0 - p[i];
    prefix[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * factor[i];
    suffix[n] = 1.0;
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * factor[i];
    const double weight = prefix[n];

    std::set<AlarmId> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) subset.insert(ids[i]);
    const BatchOutcome batch = detail::replay_batch(tree, paths, subset);

    m.expected_resolution_pilots += weight * batch.total_pilots();
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U)
        // Weight of the other alarms' outcomes: the conditional law given i fired.
        delivery[i] += prefix[i] * suffix[i + 1] * batch.delivery_time.at(ids[i]);
    for (std::size_t u = 0; u < tree.size(); ++u)
      if (std::popcount(mask & under[u]) >= 2) collide[u] += weight;
  }
  for (std::size_t i = 0; i < n; ++i) m.expected_delivery[ids[i]] = delivery[i];
  for (std::size_t u = 0; u < tree.size(); ++u) m.node_collision_prob[tree.node(u).id] = collide[u];
  return m;
}

}  // namespace ctree
