#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "ctree/ctree.hpp"

namespace ctree::testing {

// The five-alarm example: a1..a5 carry ids 1..5.
inline AlarmSet fig2_alarms() {
  return AlarmSet({{1, 0.6, {}}, {2, 0.35, {}}, {3, 0.3, {}}, {4, 0.15, {}}, {5, 0.15, {}}});
}

inline std::size_t node_with_id(const CollisionTree& tree, NodeId id) { return tree.find_node(id); }

// Internal-node probabilities, ascending.
inline std::vector<double> internal_probs(const CollisionTree& tree) {
  std::vector<double> out;
  for (const TreeNode& n : tree.nodes())
    if (!n.is_leaf()) out.push_back(n.prob);
  std::sort(out.begin(), out.end());
  return out;
}

// Minimum of sum p(a) * depth(a) over all full binary trees on the given
// leaves. Each internal node adds the weight of its leaves once, so
// cost(S) = W(S) + min over splits {A, S \ A} of cost(A) + cost(S \ A).
inline double brute_force_min_weighted_depth(const std::vector<double>& p) {
  const std::size_t n = p.size();
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<double> weight(full + 1, 0.0), cost(full + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      if (s >> i & 1U) weight[s] += p[i];
    if ((s & (s - 1)) == 0) continue;
    double best = std::numeric_limits<double>::infinity();
    // Each unordered split once: A contains the lowest set bit of s.
    const std::uint32_t low = s & (~s + 1);
    for (std::uint32_t a = (s - 1) & s; a > 0; a = (a - 1) & s)
      if ((a & low) && a != s) best = std::min(best, cost[a] + cost[s ^ a]);
    cost[s] = weight[s] + best;
  }
  return cost[full];
}

inline double weighted_depth(const CollisionTree& tree) {
  double sum = 0.0;
  for (const auto& [alarm, leaf] : tree.leaf_map()) sum += tree.node(leaf).prob * tree.node(leaf).level;
  return sum;
}

inline AlarmSet random_alarms(int n, double p_max, std::uint64_t seed) {
  return generate_instance({n, p_max, seed});
}

}  // namespace ctree::testing
