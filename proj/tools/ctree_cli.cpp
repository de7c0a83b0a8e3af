#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctree/ctree.hpp"

namespace {

using namespace ctree;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    detail::write_file(out_path, text);
}

struct BuildOpts {
  std::string in, out, format = "structured", merge = "paired";
  bool enforce = false;
  std::optional<int> budget;
};

int cmd_build(const BuildOpts& o) {
  const AlarmSet alarms = load_alarms(o.in);
  CollisionTree tree = make_tree(alarms, parse_merge_rule(o.merge));
  if (o.enforce) tree = enforce_deadlines(tree, alarms);
  if (o.budget) {
    const Feasibility f = check_feasibility(tree, *o.budget);
    std::fprintf(stderr, "pilot budget %d: %s (widest level needs %d)\n", *o.budget,
                 f.feasible ? "feasible" : "infeasible", f.max_width);
    if (!f.feasible) return 3;
  }
  if (o.format != "structured" && o.format != "graph")
    throw ConfigError("unknown tree format '" + o.format + "'");
  emit(serialize_tree(tree, o.format == "graph" ? TreeFormat::graph : TreeFormat::structured), o.out);
  return 0;
}

struct SimulateOpts {
  std::string in, out, merge = "paired";
  int window = 50, runs = 1;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateOpts& o) {
  if (o.runs < 1) throw ConfigError("runs must be >= 1");
  const AlarmSet alarms = load_alarms(o.in);
  const CollisionTree tree = make_tree(alarms, parse_merge_rule(o.merge));
  const Router router(tree);
  std::string text;
  for (int r = 0; r < o.runs; ++r) {
    const RunMetrics m = run_window(router, alarms, o.window, derive_seed(o.seed, 0, static_cast<std::uint64_t>(r)));
    const RunSummary s = summarize(m);
    nlohmann::ordered_json row{{"run", r},
                               {"seed", m.run_seed},
                               {"num_triggered", m.num_triggered},
                               {"slots", m.pilots_per_slot.size()},
                               {"avg_delivery", s.avg_delivery},
                               {"max_delivery", s.max_delivery},
                               {"avg_pilots", s.avg_pilots},
                               {"max_pilots", s.max_pilots}};
    text += row.dump() + "\n";
  }
  emit(text, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-tree pilot allocation for alarm traffic"};
  app.require_subcommand(1);

  std::string gen_out;
  InstanceConfig gen_cfg;
  auto* gen = app.add_subcommand("gen", "Generate a random alarm set");
  gen->add_option("--alarms", gen_cfg.num_alarms, "Number of alarms")->capture_default_str();
  gen->add_option("--pmax", gen_cfg.p_max, "Trigger probabilities are drawn from (0, pmax]")->capture_default_str();
  gen->add_option("--seed", gen_cfg.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  BuildOpts build_opts;
  auto* build = app.add_subcommand("build", "Build and label the collision tree");
  build->add_option("--in", build_opts.in, "Alarm file")->required();
  build->add_option("--format", build_opts.format, "structured or graph")->capture_default_str();
  build->add_option("--merge", build_opts.merge, "paired or greedy")->capture_default_str();
  build->add_flag("--enforce-deadlines", build_opts.enforce, "Promote leaves to meet deadlines");
  build->add_option("--budget", build_opts.budget, "Check the tree against a per-slot pilot budget");
  build->add_option("--out", build_opts.out, "Output file (default stdout)");

  std::string an_in, an_out, an_variant = "root_inclusive", an_merge = "paired";
  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form delivery and pilot metrics");
  analyze_cmd->add_option("--in", an_in, "Alarm file")->required();
  analyze_cmd->add_option("--variant", an_variant, "root_inclusive or paper_literal")->capture_default_str();
  analyze_cmd->add_option("--merge", an_merge, "paired or greedy")->capture_default_str();
  analyze_cmd->add_option("--out", an_out, "Output file (default stdout)");

  SimulateOpts sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Slotted simulation, one JSON line per run");
  simulate->add_option("--in", sim_opts.in, "Alarm file")->required();
  simulate->add_option("--window", sim_opts.window, "Slots in which alarms may trigger")->capture_default_str();
  simulate->add_option("--runs", sim_opts.runs, "Number of runs")->capture_default_str();
  simulate->add_option("--seed", sim_opts.seed, "Base seed")->capture_default_str();
  simulate->add_option("--merge", sim_opts.merge, "paired or greedy")->capture_default_str();
  simulate->add_option("--out", sim_opts.out, "Output file (default stdout)");

  int or_alarms = 8, or_trials = 100;
  std::uint64_t or_seed = 1;
  std::string or_in, or_merge = "paired";
  auto* oracle = app.add_subcommand("oracle", "Check closed forms against exhaustive enumeration");
  oracle->add_option("--alarms", or_alarms, "Alarms per random instance (at most 12)")->capture_default_str();
  oracle->add_option("--trials", or_trials, "Random instances")->capture_default_str();
  oracle->add_option("--seed", or_seed, "Base seed")->capture_default_str();
  oracle->add_option("--merge", or_merge, "paired or greedy")->capture_default_str();
  oracle->add_option("--in", or_in, "Alarm file: print its exact metrics instead");

  std::string sw_config, sw_out, sw_json, sw_variant, sw_merge;
  std::vector<double> sw_pmax;
  std::vector<int> sw_alarms;
  std::optional<int> sw_instances, sw_runs, sw_window;
  std::optional<std::uint64_t> sw_seed;
  std::optional<unsigned> sw_workers;
  auto* sweep = app.add_subcommand("sweep", "Run the parameter sweep and write a CSV table");
  sweep->add_option("--config", sw_config, "JSON config; flags override its keys");
  sweep->add_option("--pmax", sw_pmax, "p_max grid")->delimiter(',');
  sweep->add_option("--alarms", sw_alarms, "Alarm-count grid")->delimiter(',');
  sweep->add_option("--instances", sw_instances, "Instances per cell");
  sweep->add_option("--runs", sw_runs, "Runs per instance");
  sweep->add_option("--window", sw_window, "Slots per run");
  sweep->add_option("--seed", sw_seed, "Base seed");
  sweep->add_option("--workers", sw_workers, "Worker threads (0: all cores)");
  sweep->add_option("--variant", sw_variant, "root_inclusive or paper_literal");
  sweep->add_option("--merge", sw_merge, "paired or greedy");
  sweep->add_option("--out", sw_out, "CSV output (default stdout)");
  sweep->add_option("--json-out", sw_json, "Also write one JSON object per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      emit(alarms_to_json(generate_instance(gen_cfg)), gen_out);
    } else if (*build) {
      return cmd_build(build_opts);
    } else if (*analyze_cmd) {
      const CollisionTree tree = make_tree(load_alarms(an_in), parse_merge_rule(an_merge));
      emit(to_json(analyze(tree, parse_delivery_variant(an_variant))).dump(2) + "\n", an_out);
    } else if (*simulate) {
      return cmd_simulate(sim_opts);
    } else if (*oracle) {
      if (!or_in.empty()) {
        const AlarmSet alarms = load_alarms(or_in);
        const ExactMetrics m = exact_metrics(make_tree(alarms, parse_merge_rule(or_merge)), alarms);
        nlohmann::ordered_json doc;
        for (const auto& [a, v] : m.expected_delivery) doc["expected_delivery"][std::to_string(a)] = v;
        doc["expected_pilots_per_slot"] = m.expected_resolution_pilots;
        for (const auto& [u, v] : m.node_collision_prob) doc["collision_prob"][std::to_string(u)] = v;
        std::cout << doc.dump(2) << "\n";
      } else {
        std::cout << to_json(verify_oracle(or_alarms, or_trials, or_seed, parse_merge_rule(or_merge))).dump(2)
                  << "\n";
      }
    } else if (*sweep) {
      ExperimentConfig cfg;
      if (!sw_config.empty()) apply_config_json(cfg, detail::read_file(sw_config));
      if (!sw_pmax.empty()) cfg.p_max_values = sw_pmax;
      if (!sw_alarms.empty()) cfg.num_alarms_values = sw_alarms;
      if (sw_instances) cfg.instances_per_config = *sw_instances;
      if (sw_runs) cfg.runs_per_instance = *sw_runs;
      if (sw_window) cfg.window = *sw_window;
      if (sw_seed) cfg.base_seed = *sw_seed;
      if (sw_workers) cfg.workers = *sw_workers;
      if (!sw_variant.empty()) cfg.delivery_variant = parse_delivery_variant(sw_variant);
      if (!sw_merge.empty()) cfg.merge_rule = parse_merge_rule(sw_merge);
      const auto table = run_sweep(cfg);
      emit(sweep_to_csv(table), sw_out);
      if (!sw_json.empty()) detail::write_file(sw_json, sweep_to_jsonl(table));
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "ctree: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "ctree: %s\n", e.what());
    return 1;
  }
  return 0;
}
