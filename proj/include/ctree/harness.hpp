#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ctree/alarm.hpp"
#include "ctree/analysis.hpp"
#include "ctree/detail/format.hpp"
#include "ctree/oracle.hpp"
#include "ctree/rng.hpp"
#include "ctree/simulator.hpp"
#include "ctree/stats.hpp"
#include "ctree/tree.hpp"

namespace ctree {

struct ExperimentConfig {
  std::vector<double> p_max_values{0.001, 0.005, 0.01, 0.05, 0.1, 0.5};
  std::vector<int> num_alarms_values{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int instances_per_config = 20;
  int runs_per_instance = 50;
  int window = 50;
  std::uint64_t base_seed = 1;
  DeliveryVariant delivery_variant = DeliveryVariant::root_inclusive;
  MergeRule merge_rule = MergeRule::paired;
  unsigned workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (p_max_values.empty()) throw ConfigError("p_max_values is empty");
    if (num_alarms_values.empty()) throw ConfigError("num_alarms_values is empty");
    for (double p : p_max_values)
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p_max values must lie in (0, 1]");
    for (int n : num_alarms_values)
      if (n < 1) throw ConfigError("num_alarms values must be >= 1");
    if (instances_per_config < 1) throw ConfigError("instances_per_config must be >= 1");
    if (runs_per_instance < 1) throw ConfigError("runs_per_instance must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
  }
};

inline MergeRule parse_merge_rule(const std::string& s) {
  if (s == "paired") return MergeRule::paired;
  if (s == "greedy") return MergeRule::greedy;
  throw ConfigError("unknown merge rule '" + s + "'");
}

inline std::string to_string(MergeRule r) { return r == MergeRule::paired ? "paired" : "greedy"; }

/// Reads the keys present in a JSON config object; absent keys keep their
/// current values.
inline void apply_config_json(ExperimentConfig& cfg, const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  try {
    if (doc.contains("p_max_values")) cfg.p_max_values = doc["p_max_values"].get<std::vector<double>>();
    if (doc.contains("num_alarms_values"))
      cfg.num_alarms_values = doc["num_alarms_values"].get<std::vector<int>>();
    if (doc.contains("instances_per_config")) cfg.instances_per_config = doc["instances_per_config"].get<int>();
    if (doc.contains("runs_per_instance")) cfg.runs_per_instance = doc["runs_per_instance"].get<int>();
    if (doc.contains("window")) cfg.window = doc["window"].get<int>();
    if (doc.contains("base_seed")) cfg.base_seed = doc["base_seed"].get<std::uint64_t>();
    if (doc.contains("delivery_variant"))
      cfg.delivery_variant = parse_delivery_variant(doc["delivery_variant"].get<std::string>());
    if (doc.contains("merge_rule")) cfg.merge_rule = parse_merge_rule(doc["merge_rule"].get<std::string>());
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<unsigned>();
  } catch (const nlohmann::json::type_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

struct CellResult {
  double p_max = 0.0;
  int num_alarms = 0;
  AggregateStats sim_avg_delivery;
  AggregateStats sim_max_delivery;
  AggregateStats sim_avg_pilots;
  AggregateStats sim_max_pilots;
  AggregateStats ana_avg_delivery;
  AggregateStats ana_exp_pilots;
};

namespace detail {

struct InstanceResult {
  double ana_avg_delivery = 0.0;
  double ana_exp_pilots = 0.0;
  std::vector<RunSummary> runs;
};

// Runs task(i) for i in [0, count) on a fixed-size pool. The first exception
// thrown by any task is rethrown after all workers have stopped.
template <typename Task>
void parallel_for(std::size_t count, unsigned workers, Task&& task) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Instance seeds use run index 0 of the instance's stream; run r uses r + 1.
/// Instance indices are global across cells.
inline std::vector<CellResult> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t per_cell = static_cast<std::size_t>(cfg.instances_per_config);
  const std::size_t cells = cfg.p_max_values.size() * cfg.num_alarms_values.size();
  std::vector<detail::InstanceResult> results(cells * per_cell);

  detail::parallel_for(results.size(), cfg.workers, [&](std::size_t g) {
    const std::size_t cell = g / per_cell;
    const double p_max = cfg.p_max_values[cell / cfg.num_alarms_values.size()];
    const int n = cfg.num_alarms_values[cell % cfg.num_alarms_values.size()];
    const AlarmSet alarms = generate_instance({n, p_max, derive_seed(cfg.base_seed, g, 0)});
    const CollisionTree tree = make_tree(alarms, cfg.merge_rule);
    const Router router(tree);

    detail::InstanceResult& out = results[g];
    out.ana_avg_delivery = average_delivery_time(tree, cfg.delivery_variant);
    out.ana_exp_pilots = expected_pilots_per_slot(tree);
    out.runs.reserve(static_cast<std::size_t>(cfg.runs_per_instance));
    for (int r = 0; r < cfg.runs_per_instance; ++r)
      out.runs.push_back(summarize(
          run_window(router, alarms, cfg.window, derive_seed(cfg.base_seed, g, static_cast<std::uint64_t>(r) + 1))));
  });

  std::vector<CellResult> table;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    CellResult row;
    row.p_max = cfg.p_max_values[cell / cfg.num_alarms_values.size()];
    row.num_alarms = cfg.num_alarms_values[cell % cfg.num_alarms_values.size()];
    std::vector<double> avg_d, max_d, avg_p, max_p, ana_d, ana_p;
    for (std::size_t i = 0; i < per_cell; ++i) {
      const auto& inst = results[cell * per_cell + i];
      ana_d.push_back(inst.ana_avg_delivery);
      ana_p.push_back(inst.ana_exp_pilots);
      for (const RunSummary& s : inst.runs) {
        avg_d.push_back(s.avg_delivery);
        max_d.push_back(s.max_delivery);
        avg_p.push_back(s.avg_pilots);
        max_p.push_back(s.max_pilots);
      }
    }
    row.sim_avg_delivery = aggregate(avg_d);
    row.sim_max_delivery = aggregate(max_d);
    row.sim_avg_pilots = aggregate(avg_p);
    row.sim_max_pilots = aggregate(max_p);
    row.ana_avg_delivery = aggregate(ana_d);
    row.ana_exp_pilots = aggregate(ana_p);
    table.push_back(row);
  }
  return table;
}

inline constexpr const char* kSweepCsvHeader =
    "p_max,num_alarms,sim_avg_delivery,sim_avg_delivery_ci,sim_max_delivery,sim_max_delivery_ci,"
    "sim_avg_pilots,sim_avg_pilots_ci,sim_max_pilots,sim_max_pilots_ci,ana_avg_delivery,"
    "ana_avg_delivery_ci,ana_exp_pilots,ana_exp_pilots_ci";

inline std::string sweep_to_csv(const std::vector<CellResult>& table) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  char p[32];
  for (const CellResult& r : table) {
    std::snprintf(p, sizeof p, "%g", r.p_max);
    out += std::string(p) + "," + std::to_string(r.num_alarms);
    for (const AggregateStats* s : {&r.sim_avg_delivery, &r.sim_max_delivery, &r.sim_avg_pilots,
                                    &r.sim_max_pilots, &r.ana_avg_delivery, &r.ana_exp_pilots})
      out += "," + detail::format_fixed(s->mean) + "," + detail::format_fixed(s->ci95_half_width);
    out += "\n";
  }
  return out;
}

/// One JSON object per line, mirroring the CSV rows.
inline std::string sweep_to_jsonl(const std::vector<CellResult>& table) {
  std::string out;
  for (const CellResult& r : table) {
    nlohmann::ordered_json row;
    row["p_max"] = r.p_max;
    row["num_alarms"] = r.num_alarms;
    auto put = [&](const char* name, const AggregateStats& s) {
      row[name] = {{"mean", s.mean}, {"ci95_half_width", s.ci95_half_width}, {"n", s.n}};
    };
    put("sim_avg_delivery", r.sim_avg_delivery);
    put("sim_max_delivery", r.sim_max_delivery);
    put("sim_avg_pilots", r.sim_avg_pilots);
    put("sim_max_pilots", r.sim_max_pilots);
    put("ana_avg_delivery", r.ana_avg_delivery);
    put("ana_exp_pilots", r.ana_exp_pilots);
    out += row.dump() + "\n";
  }
  return out;
}

inline std::vector<CellResult> run_sweep(const ExperimentConfig& cfg, const std::string& csv_path) {
  auto table = run_sweep(cfg);
  detail::write_file(csv_path, sweep_to_csv(table));
  return table;
}

inline constexpr int kOracleVerifyMaxAlarms = 12;
inline constexpr double kIdentityTolerance = 1e-9;

struct OracleReport {
  int num_alarms = 0;
  int trials = 0;
  double max_dev_collision_prob = 0.0;
  double max_dev_expected_delivery = 0.0;
  double max_dev_expected_pilots = 0.0;
};

/// Checks the closed-form metrics against exhaustive enumeration on random
/// instances with trigger probabilities in (0, 1].
inline OracleReport verify_oracle(int n, int trials, std::uint64_t seed,
                                  MergeRule rule = MergeRule::paired) {
  if (n > kOracleVerifyMaxAlarms)
    throw SizeError("verify_oracle: n = " + std::to_string(n) + " exceeds " +
                    std::to_string(kOracleVerifyMaxAlarms));
  if (n < 1) throw ConfigError("verify_oracle: n must be >= 1");
  if (trials < 1) throw ConfigError("verify_oracle: trials must be >= 1");

  OracleReport rep;
  rep.num_alarms = n;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t inst_seed = derive_seed(seed, static_cast<std::uint64_t>(t), 0);
    const AlarmSet alarms = generate_instance({n, 1.0, inst_seed});
    const CollisionTree tree = make_tree(alarms, rule);
    const ExactMetrics exact = exact_metrics(tree, alarms);

    auto check = [&](const char* metric, double dev, double& slot) {
      slot = std::max(slot, dev);
      if (!(dev <= kIdentityTolerance)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", dev);
        throw VerificationError(std::string("metric ") + metric + " deviates by " + buf +
                                " on instance seed " + std::to_string(inst_seed));
      }
    };
    for (std::size_t u = 0; u < tree.size(); ++u)
      check("collision_prob",
            std::abs(collision_prob(tree, u) - exact.node_collision_prob.at(tree.node(u).id)),
            rep.max_dev_collision_prob);
    for (const AlarmSource& a : alarms)
      check("expected_delivery",
            std::abs(expected_delivery_time(tree, a.id) - exact.expected_delivery.at(a.id)),
            rep.max_dev_expected_delivery);
    check("expected_pilots_per_slot",
          std::abs(expected_pilots_per_slot(tree) - exact.expected_resolution_pilots),
          rep.max_dev_expected_pilots);
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const OracleReport& r) {
  return {{"num_alarms", r.num_alarms},
          {"trials", r.trials},
          {"max_dev_collision_prob", r.max_dev_collision_prob},
          {"max_dev_expected_delivery", r.max_dev_expected_delivery},
          {"max_dev_expected_pilots", r.max_dev_expected_pilots}};
}

}  // namespace ctree
