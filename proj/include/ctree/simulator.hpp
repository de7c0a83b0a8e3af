#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctree/alarm.hpp"
#include "ctree/rng.hpp"
#include "ctree/tree.hpp"

namespace ctree {

/// Root-to-leaf paths for every alarm of a tree, shared by all runs.
class Router {
 public:
  explicit Router(const CollisionTree& tree) : tree_(&tree) {
    for (const auto& [alarm, leaf] : tree.leaf_map()) paths_[alarm] = tree.path_from_root(leaf);
  }

  const CollisionTree& tree() const noexcept { return *tree_; }

  /// Child of `node` on the way to the alarm's leaf.
  std::size_t child_toward(std::size_t node, AlarmId alarm) const {
    return paths_.at(alarm)[static_cast<std::size_t>(tree_->node(node).level) + 1];
  }

 private:
  const CollisionTree* tree_;
  std::unordered_map<AlarmId, std::vector<std::size_t>> paths_;
};

/// One collision being resolved in its own pilot range.
class ResolutionProcess {
 public:
  struct FrontierEntry {
    std::size_t node;
    std::vector<AlarmId> alarms;  // ascending, size >= 2
  };

  struct Step {
    int pilots = 0;
    std::vector<AlarmId> delivered;
  };

  ResolutionProcess(std::vector<AlarmId> colliding, int start_slot, std::uint64_t offset_range)
      : start_slot_(start_slot), offset_range_(offset_range) {
    std::sort(colliding.begin(), colliding.end());
    frontier_.push_back({CollisionTree::root_pos(), std::move(colliding)});
  }

  /// Advances one slot: every frontier node reserves a pilot per child, lone
  /// transmitters deliver and shared children form the next frontier.
  Step advance(const Router& router) {
    Step step;
    std::vector<FrontierEntry> next;
    for (const FrontierEntry& entry : frontier_) {
      const TreeNode& node = router.tree().node(entry.node);
      step.pilots += static_cast<int>(node.children.size());
      std::map<std::size_t, std::vector<AlarmId>> on_child;
      for (AlarmId a : entry.alarms) on_child[router.child_toward(entry.node, a)].push_back(a);
      for (auto& [child, members] : on_child) {
        if (members.size() == 1)
          step.delivered.push_back(members.front());
        else
          next.push_back({child, std::move(members)});
      }
    }
    frontier_ = std::move(next);
    return step;
  }

  bool done() const noexcept { return frontier_.empty(); }
  int start_slot() const noexcept { return start_slot_; }
  std::uint64_t offset_range() const noexcept { return offset_range_; }
  const std::vector<FrontierEntry>& frontier() const noexcept { return frontier_; }

 private:
  std::vector<FrontierEntry> frontier_;
  int start_slot_;
  std::uint64_t offset_range_;
};

struct RunMetrics {
  std::map<AlarmId, int> delivery_times;  // triggered alarms only
  std::vector<int> pilots_per_slot;       // index 0 is slot 1
  int num_triggered = 0;
  std::uint64_t run_seed = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct RunSummary {
  double avg_delivery = 1.0;
  double max_delivery = 1.0;
  double avg_pilots = 1.0;
  double max_pilots = 1.0;
};

/// Slot in which each alarm triggers (absent: never within the window).
struct TriggerSchedule {
  int window = 0;
  std::map<AlarmId, int> trigger_slot;
};

/// One uniform draw per (untriggered alarm, slot), alarms in ascending id
/// order within each slot.
inline TriggerSchedule draw_triggers(const AlarmSet& alarms, int window, Xoshiro256& rng) {
  TriggerSchedule s;
  s.window = window;
  std::vector<char> fired(alarms.size(), 0);
  for (int slot = 1; slot <= window; ++slot) {
    std::size_t i = 0;
    for (const AlarmSource& a : alarms) {
      if (!fired[i] && rng.uniform() < a.trigger_prob) {
        fired[i] = 1;
        s.trigger_slot[a.id] = slot;
      }
      ++i;
    }
  }
  return s;
}

/// Deterministic replay of a trigger schedule. Each alarm transmits on the
/// common pilot in its trigger slot; two or more transmitters start an
/// isolated resolution process that advances one tree level per slot. Runs
/// past the window until every process has finished.
inline RunMetrics replay_schedule(const Router& router, const TriggerSchedule& schedule) {
  if (schedule.window < 1) throw ValidationError("window must be >= 1");
  std::vector<std::vector<AlarmId>> by_slot(static_cast<std::size_t>(schedule.window) + 1);
  for (const auto& [alarm, slot] : schedule.trigger_slot) {
    if (slot < 1 || slot > schedule.window)
      throw ValidationError("trigger slot outside the window");
    if (!router.tree().has_alarm(alarm))
      throw ValidationError("alarm " + std::to_string(alarm) + " is not in the tree");
    by_slot[static_cast<std::size_t>(slot)].push_back(alarm);
  }

  RunMetrics m;
  std::vector<ResolutionProcess> active;
  std::uint64_t next_range = 1;
  for (int slot = 1; slot <= schedule.window || !active.empty(); ++slot) {
    int pilots = 1;  // common pilot
    std::vector<ResolutionProcess> still;
    for (ResolutionProcess& proc : active) {
      const auto step = proc.advance(router);
      pilots += step.pilots;
      for (AlarmId a : step.delivered) m.delivery_times[a] = slot - proc.start_slot() + 1;
      if (!proc.done()) still.push_back(std::move(proc));
    }
    active = std::move(still);

    if (slot <= schedule.window) {
      auto& fresh = by_slot[static_cast<std::size_t>(slot)];
      m.num_triggered += static_cast<int>(fresh.size());
      if (fresh.size() == 1)
        m.delivery_times[fresh.front()] = 1;
      else if (fresh.size() > 1)
        active.emplace_back(std::move(fresh), slot, next_range++);
    }
    m.pilots_per_slot.push_back(pilots);
  }
  return m;
}

inline void check_tree_matches(const CollisionTree& tree, const AlarmSet& alarms) {
  if (tree.num_alarms() != alarms.size())
    throw ValidationError("tree and alarm set differ in size");
  for (const AlarmSource& a : alarms) {
    if (!tree.has_alarm(a.id))
      throw ValidationError("alarm " + std::to_string(a.id) + " is not in the tree");
    if (tree.node(tree.leaf_pos(a.id)).prob != a.trigger_prob)
      throw ValidationError("alarm " + std::to_string(a.id) +
                            ": trigger probability differs from its leaf");
  }
}

inline RunMetrics run_window(const Router& router, const AlarmSet& alarms, int window,
                             std::uint64_t seed) {
  if (window < 1) throw ValidationError("window must be >= 1");
  Xoshiro256 rng(seed);
  RunMetrics m = replay_schedule(router, draw_triggers(alarms, window, rng));
  m.run_seed = seed;
  return m;
}

inline RunMetrics run_window(const CollisionTree& tree, const AlarmSet& alarms, int window,
                             std::uint64_t seed) {
  check_tree_matches(tree, alarms);
  return run_window(Router(tree), alarms, window, seed);
}

/// Per-run averages and maxima. A run without triggers reports 1.0
/// everywhere.
inline RunSummary summarize(const RunMetrics& m) {
  RunSummary s;
  if (m.delivery_times.empty()) return s;
  double sum = 0.0, peak = 0.0;
  for (const auto& [alarm, d] : m.delivery_times) {
    sum += d;
    peak = std::max(peak, static_cast<double>(d));
  }
  s.avg_delivery = sum / static_cast<double>(m.delivery_times.size());
  s.max_delivery = peak;
  sum = 0.0;
  peak = 0.0;
  for (int p : m.pilots_per_slot) {
    sum += p;
    peak = std::max(peak, static_cast<double>(p));
  }
  if (!m.pilots_per_slot.empty()) {
    s.avg_pilots = sum / static_cast<double>(m.pilots_per_slot.size());
    s.max_pilots = peak;
  }
  return s;
}

}  // namespace ctree
