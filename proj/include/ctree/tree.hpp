#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctree/alarm.hpp"
#include "ctree/error.hpp"

namespace ctree {

using NodeId = std::int64_t;

inline constexpr int kUnlabeled = -1;
inline constexpr int kCommonPilot = 0;
inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

/// Product of (1 - p) over probs. Falls back to summing logarithms when some
/// factor is below 1e-12, where repeated multiplication would lose the tail.
inline double complement_product(std::span<const double> probs) {
  bool tiny = false;
  for (double p : probs) tiny = tiny || (1.0 - p) < 1e-12;
  if (!tiny) {
    double q = 1.0;
    for (double p : probs) q *= 1.0 - p;
    return q;
  }
  double log_q = 0.0;
  for (double p : probs) {
    if (p >= 1.0) return 0.0;
    log_q += std::log1p(-p);
  }
  return std::exp(log_q);
}

/// Probability that at least one of the given independent alarms triggers in
/// a slot: 1 - prod(1 - p).
inline double node_probability(std::span<const double> leaf_probs) {
  if (leaf_probs.empty()) throw ValidationError("node_probability: empty leaf set");
  for (double p : leaf_probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("node_probability: probability outside [0,1]");
  return 1.0 - complement_product(leaf_probs);
}

struct TreeNode {
  NodeId id = 0;
  double prob = 0.0;
  int level = 0;
  int pilot_label = kUnlabeled;
  std::optional<AlarmId> alarm;       // set iff leaf
  std::vector<std::size_t> children;  // positions in CollisionTree::nodes()
  std::size_t parent = kNoNode;

  bool is_leaf() const noexcept { return children.empty(); }
  bool is_root() const noexcept { return parent == kNoNode; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct PilotSequence {
  std::vector<int> labels;  // labels.front() is the common pilot

  std::size_t size() const noexcept { return labels.size(); }
  int last() const { return labels.back(); }

  friend bool operator==(const PilotSequence&, const PilotSequence&) = default;
};

namespace detail {

// Mutable, parent-linked form used while constructing or editing a tree.
// CollisionTree::from_draft() turns it into the canonical immutable layout.
struct DraftNode {
  NodeId id = 0;
  std::optional<AlarmId> alarm;
  double leaf_prob = 0.0;  // only meaningful on leaves
  int pilot_label = kUnlabeled;
  std::vector<std::size_t> children;
  std::size_t parent = kNoNode;
  bool alive = true;
};

struct Draft {
  std::vector<DraftNode> nodes;
  std::size_t root = kNoNode;
};

}  // namespace detail

/// Immutable collision tree. Nodes are stored in breadth-first order with
/// each parent's children sorted by (prob, node id), so position 0 is the
/// root and every level reads left to right. Trees compare equal iff they
/// have the same structure, probabilities and labels.
class CollisionTree {
 public:
  CollisionTree() = default;

  static CollisionTree from_draft(const detail::Draft& draft);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t pos) const { return nodes_.at(pos); }
  const TreeNode& root() const { return nodes_.front(); }
  static constexpr std::size_t root_pos() noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::size_t num_alarms() const noexcept { return leaf_of_.size(); }
  bool has_alarm(AlarmId id) const { return leaf_of_.count(id) != 0; }

  std::size_t leaf_pos(AlarmId id) const {
    auto it = leaf_of_.find(id);
    if (it == leaf_of_.end())
      throw LookupError("alarm " + std::to_string(id) + " is not in the tree");
    return it->second;
  }

  const std::map<AlarmId, std::size_t>& leaf_map() const noexcept { return leaf_of_; }

  std::vector<AlarmId> alarm_ids() const {
    std::vector<AlarmId> ids;
    ids.reserve(leaf_of_.size());
    for (const auto& [id, pos] : leaf_of_) ids.push_back(id);
    return ids;
  }

  std::size_t find_node(NodeId id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].id == id) return i;
    throw LookupError("node " + std::to_string(id) + " is not in the tree");
  }

  /// Number of levels, root level included.
  int depth() const noexcept { return static_cast<int>(widths_.size()); }
  const std::vector<int>& level_widths() const noexcept { return widths_; }
  int max_width() const noexcept {
    return widths_.empty() ? 0 : *std::max_element(widths_.begin(), widths_.end());
  }

  bool labeled() const noexcept {
    return !nodes_.empty() && nodes_.front().pilot_label != kUnlabeled;
  }

  /// Leaf positions in the subtree rooted at pos, left to right.
  std::vector<std::size_t> leaves_under(std::size_t pos) const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{pos};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      const TreeNode& n = nodes_.at(u);
      if (n.is_leaf()) out.push_back(u);
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  std::vector<double> leaf_probs_under(std::size_t pos) const {
    std::vector<double> probs;
    for (std::size_t leaf : leaves_under(pos)) probs.push_back(nodes_[leaf].prob);
    return probs;
  }

  /// Proper ancestors of pos, nearest first (parent, grandparent, ..., root).
  std::vector<std::size_t> ancestors(std::size_t pos) const {
    std::vector<std::size_t> out;
    for (std::size_t u = nodes_.at(pos).parent; u != kNoNode; u = nodes_[u].parent)
      out.push_back(u);
    return out;
  }

  /// Root-to-node path, both ends included.
  std::vector<std::size_t> path_from_root(std::size_t pos) const {
    std::vector<std::size_t> path = ancestors(pos);
    std::reverse(path.begin(), path.end());
    path.push_back(pos);
    return path;
  }

  bool is_ancestor_or_self(std::size_t anc, std::size_t pos) const {
    for (std::size_t u = pos; u != kNoNode; u = nodes_[u].parent)
      if (u == anc) return true;
    return false;
  }

  detail::Draft to_draft() const {
    detail::Draft d;
    d.root = 0;
    d.nodes.reserve(nodes_.size());
    for (const TreeNode& n : nodes_) {
      detail::DraftNode dn;
      dn.id = n.id;
      dn.alarm = n.alarm;
      dn.leaf_prob = n.prob;
      dn.pilot_label = n.pilot_label;
      dn.children = n.children;
      dn.parent = n.parent;
      d.nodes.push_back(std::move(dn));
    }
    return d;
  }

  friend bool operator==(const CollisionTree& a, const CollisionTree& b) {
    return a.nodes_ == b.nodes_;
  }

 private:
  friend CollisionTree assign_pilots(CollisionTree tree);

  std::vector<TreeNode> nodes_;
  std::map<AlarmId, std::size_t> leaf_of_;
  std::vector<int> widths_;
};

inline CollisionTree CollisionTree::from_draft(const detail::Draft& draft) {
  if (draft.root == kNoNode || draft.root >= draft.nodes.size())
    throw ValidationError("tree has no root");
  const auto& dn = draft.nodes;

  // Leaf probabilities per subtree, collected in post-order.
  std::vector<std::vector<double>> leaf_probs(dn.size());
  std::vector<double> prob(dn.size(), 0.0);
  {
    std::vector<std::pair<std::size_t, bool>> stack{{draft.root, false}};
    std::vector<char> seen(dn.size(), 0);
    while (!stack.empty()) {
      auto [u, expanded] = stack.back();
      stack.pop_back();
      if (!expanded) {
        if (seen[u]) throw ValidationError("tree contains a cycle or shared node");
        seen[u] = 1;
        stack.push_back({u, true});
        for (std::size_t c : dn[u].children) stack.push_back({c, false});
        continue;
      }
      if (dn[u].children.empty()) {
        leaf_probs[u] = {dn[u].leaf_prob};
      } else {
        for (std::size_t c : dn[u].children) {
          leaf_probs[u].insert(leaf_probs[u].end(), leaf_probs[c].begin(), leaf_probs[c].end());
          leaf_probs[c].clear();
          leaf_probs[c].shrink_to_fit();
        }
      }
      prob[u] = node_probability(leaf_probs[u]);
      if (dn[u].children.empty()) prob[u] = dn[u].leaf_prob;
    }
    leaf_probs[draft.root].clear();
  }

  CollisionTree tree;
  std::vector<std::size_t> order{draft.root};
  std::vector<std::size_t> pos_of(dn.size(), kNoNode);
  pos_of[draft.root] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t u = order[i];
    std::vector<std::size_t> kids = dn[u].children;
    std::sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
      if (prob[a] != prob[b]) return prob[a] < prob[b];
      return dn[a].id < dn[b].id;
    });
    TreeNode n;
    n.id = dn[u].id;
    n.prob = prob[u];
    n.alarm = dn[u].alarm;
    n.pilot_label = dn[u].pilot_label;
    if (u != draft.root) {
      n.parent = pos_of[dn[u].parent];
      n.level = tree.nodes_[n.parent].level + 1;
    }
    for (std::size_t c : kids) {
      pos_of[c] = order.size();
      order.push_back(c);
      n.children.push_back(pos_of[c]);
    }
    if (n.is_leaf() != n.alarm.has_value())
      throw ValidationError("node " + std::to_string(n.id) +
                            ": leaves must carry an alarm id and internal nodes must not");
    if (n.alarm && !tree.leaf_of_.emplace(*n.alarm, i).second)
      throw ValidationError("alarm " + std::to_string(*n.alarm) + " appears on two leaves");
    if (static_cast<std::size_t>(n.level) >= tree.widths_.size()) tree.widths_.push_back(0);
    ++tree.widths_[static_cast<std::size_t>(n.level)];
    tree.nodes_.push_back(std::move(n));
  }
  return tree;
}

enum class MergeRule {
  // Each pass sorts the orphans by (prob, node id) and pairs them off two at
  // a time; an odd leftover waits for the next pass. Parents created in a
  // pass are only merged in later passes.
  paired,
  // Always merges the two lowest-probability orphans, including a parent
  // created by the previous merge.
  greedy,
};

/// Huffman-style bottom-up construction. Leaves take their alarm ids as node
/// ids, merged parents take max_alarm_id + 1, + 2, ... in creation order.
/// The result carries no pilot labels; see assign_pilots().
inline CollisionTree build_tree(const AlarmSet& alarms, MergeRule rule = MergeRule::paired) {
  if (alarms.empty()) throw ValidationError("build_tree: empty alarm set");

  detail::Draft d;
  std::vector<double> none;  // prod(1 - p) over each node's leaves
  for (const AlarmSource& a : alarms) {
    detail::DraftNode leaf;
    leaf.id = a.id;
    leaf.alarm = a.id;
    leaf.leaf_prob = a.trigger_prob;
    d.nodes.push_back(leaf);
    none.push_back(1.0 - a.trigger_prob);
  }
  NodeId next_id = alarms.alarms().back().id + 1;

  auto merge = [&](std::size_t a, std::size_t b) {
    detail::DraftNode parent;
    parent.id = next_id++;
    parent.children = {a, b};
    const std::size_t p = d.nodes.size();
    d.nodes.push_back(std::move(parent));
    d.nodes[a].parent = p;
    d.nodes[b].parent = p;
    none.push_back(none[a] * none[b]);
    return p;
  };
  // Lower probability first, then lower node id.
  auto before = [&](std::size_t a, std::size_t b) {
    if (none[a] != none[b]) return none[a] > none[b];
    return d.nodes[a].id < d.nodes[b].id;
  };

  std::vector<std::size_t> orphans(d.nodes.size());
  for (std::size_t i = 0; i < orphans.size(); ++i) orphans[i] = i;

  if (rule == MergeRule::paired) {
    while (orphans.size() > 1) {
      std::sort(orphans.begin(), orphans.end(), before);
      std::vector<std::size_t> next;
      std::size_t i = 0;
      for (; i + 1 < orphans.size(); i += 2) next.push_back(merge(orphans[i], orphans[i + 1]));
      if (i < orphans.size()) next.push_back(orphans[i]);
      orphans = std::move(next);
    }
  } else {
    auto after = [&](std::size_t a, std::size_t b) { return before(b, a); };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(after)> heap(after,
                                                                                     orphans);
    while (heap.size() > 1) {
      const std::size_t a = heap.top();
      heap.pop();
      const std::size_t b = heap.top();
      heap.pop();
      heap.push(merge(a, b));
    }
    orphans = {heap.top()};
  }
  d.root = orphans.front();
  return CollisionTree::from_draft(d);
}

/// Labels the root with the common pilot 0 and the nodes of every other level
/// 1..width from left to right.
inline CollisionTree assign_pilots(CollisionTree tree) {
  std::vector<int> next(tree.widths_.size(), 1);
  for (TreeNode& n : tree.nodes_)
    n.pilot_label = n.is_root() ? kCommonPilot : next[static_cast<std::size_t>(n.level)]++;
  return tree;
}

inline CollisionTree make_tree(const AlarmSet& alarms, MergeRule rule = MergeRule::paired) {
  return assign_pilots(build_tree(alarms, rule));
}

inline PilotSequence pilot_sequence(const CollisionTree& tree, AlarmId alarm) {
  const std::size_t leaf = tree.leaf_pos(alarm);
  if (!tree.labeled()) throw ValidationError("pilot_sequence: tree has no pilot labels");
  PilotSequence seq;
  for (std::size_t u : tree.path_from_root(leaf)) seq.labels.push_back(tree.node(u).pilot_label);
  return seq;
}

/// Worst-case slots from first transmission to delivery: the length of the
/// alarm's pilot sequence, i.e. its leaf level + 1.
inline int max_delivery_time(const CollisionTree& tree, AlarmId alarm) {
  return tree.node(tree.leaf_pos(alarm)).level + 1;
}

struct Feasibility {
  bool feasible = false;
  int max_width = 0;
};

inline Feasibility check_feasibility(const CollisionTree& tree, int pilot_budget) {
  if (pilot_budget < 1) throw ValidationError("pilot budget must be >= 1");
  const int width = tree.max_width();
  return {width <= pilot_budget, width};
}

namespace detail {

inline int draft_level(const Draft& d, std::size_t u) {
  int level = 0;
  for (std::size_t p = d.nodes[u].parent; p != kNoNode; p = d.nodes[p].parent) ++level;
  return level;
}

// Moves leaf u under its grandparent. A parent left with one child is
// replaced by that child.
inline void promote(Draft& d, std::size_t u) {
  const std::size_t p = d.nodes[u].parent;
  const std::size_t g = d.nodes[p].parent;
  auto& siblings = d.nodes[p].children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), u));
  d.nodes[g].children.push_back(u);
  d.nodes[u].parent = g;
  if (siblings.size() == 1) {
    const std::size_t only = siblings.front();
    auto& uncles = d.nodes[g].children;
    *std::find(uncles.begin(), uncles.end(), p) = only;
    d.nodes[only].parent = g;
    d.nodes[p].children.clear();
    d.nodes[p].alive = false;
  }
}

// Drops dead nodes so from_draft sees a clean draft.
inline Draft compact(const Draft& d) {
  std::vector<std::size_t> remap(d.nodes.size(), kNoNode);
  Draft out;
  for (std::size_t i = 0; i < d.nodes.size(); ++i)
    if (d.nodes[i].alive) {
      remap[i] = out.nodes.size();
      out.nodes.push_back(d.nodes[i]);
    }
  for (auto& n : out.nodes) {
    if (n.parent != kNoNode) n.parent = remap[n.parent];
    for (auto& c : n.children) c = remap[c];
  }
  out.root = remap[d.root];
  return out;
}

}  // namespace detail

/// Promotes leaves toward the root until every alarm's max delivery time is
/// within its deadline, then recomputes probabilities and pilot labels.
/// Promotion only ever shortens paths.
inline CollisionTree enforce_deadlines(const CollisionTree& tree, const AlarmSet& alarms) {
  if (alarms.size() != tree.num_alarms())
    throw ValidationError("enforce_deadlines: alarm set does not match tree");
  for (const AlarmSource& a : alarms)
    if (!tree.has_alarm(a.id))
      throw ValidationError("enforce_deadlines: alarm " + std::to_string(a.id) +
                            " is not in the tree");

  bool changed = false;
  detail::Draft d = tree.to_draft();
  for (const AlarmSource& a : alarms) {
    if (!a.deadline) continue;
    const int deadline = *a.deadline;
    if (deadline < 2 && alarms.size() >= 2)
      throw InfeasibleError("alarm " + std::to_string(a.id) + ": deadline " +
                                std::to_string(deadline) +
                                " is unreachable when the common pilot is shared",
                            a.id);
    const std::size_t leaf = tree.leaf_pos(a.id);
    while (detail::draft_level(d, leaf) + 1 > deadline) {
      detail::promote(d, leaf);
      changed = true;
    }
  }
  if (!changed) return tree.labeled() ? tree : assign_pilots(tree);
  return assign_pilots(CollisionTree::from_draft(detail::compact(d)));
}

}  // namespace ctree
