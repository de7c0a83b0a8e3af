#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctree/error.hpp"
#include "ctree/rng.hpp"

namespace ctree {

using AlarmId = std::int64_t;

/// One alarm type: fires in any slot with probability trigger_prob, at most
/// once per window.
struct AlarmSource {
  AlarmId id = 0;
  double trigger_prob = 0.0;
  std::optional<int> deadline;  // slots, >= 1

  friend bool operator==(const AlarmSource&, const AlarmSource&) = default;
};

/// Validated, id-sorted collection of alarm sources.
class AlarmSet {
 public:
  AlarmSet() = default;

  explicit AlarmSet(std::vector<AlarmSource> alarms) : alarms_(std::move(alarms)) {
    std::sort(alarms_.begin(), alarms_.end(),
              [](const AlarmSource& a, const AlarmSource& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < alarms_.size(); ++i) {
      const AlarmSource& a = alarms_[i];
      if (a.id < 0)
        throw ValidationError("alarm id " + std::to_string(a.id) + " is negative");
      if (i > 0 && alarms_[i - 1].id == a.id)
        throw ValidationError("duplicate alarm id " + std::to_string(a.id));
      if (!(a.trigger_prob >= 0.0 && a.trigger_prob <= 1.0))
        throw ValidationError("alarm " + std::to_string(a.id) +
                              ": trigger_prob outside [0,1]");
      if (a.deadline && *a.deadline < 1)
        throw ValidationError("alarm " + std::to_string(a.id) + ": deadline must be >= 1");
    }
  }

  const std::vector<AlarmSource>& alarms() const noexcept { return alarms_; }
  std::size_t size() const noexcept { return alarms_.size(); }
  bool empty() const noexcept { return alarms_.empty(); }

  auto begin() const noexcept { return alarms_.begin(); }
  auto end() const noexcept { return alarms_.end(); }

  const AlarmSource* find(AlarmId id) const {
    auto it = std::lower_bound(alarms_.begin(), alarms_.end(), id,
                               [](const AlarmSource& a, AlarmId v) { return a.id < v; });
    return (it != alarms_.end() && it->id == id) ? &*it : nullptr;
  }

  const AlarmSource& at(AlarmId id) const {
    if (const AlarmSource* a = find(id)) return *a;
    throw LookupError("unknown alarm id " + std::to_string(id));
  }

  friend bool operator==(const AlarmSet&, const AlarmSet&) = default;

 private:
  std::vector<AlarmSource> alarms_;
};

struct InstanceConfig {
  int num_alarms = 10;
  double p_max = 0.01;
  std::uint64_t seed = 0;
};

/// Alarms 0..num_alarms-1 with trigger probabilities drawn independently and
/// uniformly from (0, p_max].
inline AlarmSet generate_instance(const InstanceConfig& config) {
  if (config.num_alarms < 1)
    throw ConfigError("num_alarms must be >= 1");
  if (!(config.p_max > 0.0 && config.p_max <= 1.0))
    throw ConfigError("p_max must lie in (0, 1]");

  Xoshiro256 rng(config.seed);
  std::vector<AlarmSource> alarms;
  alarms.reserve(static_cast<std::size_t>(config.num_alarms));
  for (int i = 0; i < config.num_alarms; ++i) {
    // u in [0,1) maps to (0, p_max]
    const double u = rng.uniform();
    alarms.push_back({i, config.p_max * (1.0 - u), std::nullopt});
  }
  return AlarmSet(std::move(alarms));
}

}  // namespace ctree
