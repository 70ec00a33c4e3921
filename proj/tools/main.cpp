#include <algorithm>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "shieldrl/automaton.hpp"
#include "shieldrl/errors.hpp"
#include "shieldrl/harness.hpp"

namespace {

shieldrl::ExperimentConfig load_config(const std::string& source) {
  auto names = shieldrl::preset_names();
  if (std::find(names.begin(), names.end(), source) != names.end())
    return shieldrl::preset(source);
  return shieldrl::ExperimentConfig::from_json_file(source);
}

void apply_overrides(shieldrl::ExperimentConfig& config, std::uint64_t seed,
                     bool seed_set, const std::string& outdir, int episodes) {
  if (seed_set) config.seeds = {seed};
  if (!outdir.empty()) config.outdir = outdir;
  if (episodes > 0) config.n_episodes = episodes;
}

int cmd_compile(const std::string& formula, const std::string& dot_file,
                const std::string& json_file) {
  shieldrl::CompileReport report = shieldrl::compile_report(formula);
  std::cout << "formula: " << report.normal_form << '\n';
  std::cout << "T = " << report.horizon << '\n';
  std::cout << "fsa states: " << report.fsa_states << '\n';
  std::cout << "alphabet atoms: " << report.alphabet_atoms << '\n';
  if (!dot_file.empty()) {
    std::ofstream out(dot_file);
    out << report.dot;
    std::cout << "dot written to " << dot_file << '\n';
  } else {
    std::cout << report.dot;
  }
  if (!json_file.empty()) {
    auto fsa = shieldrl::compile_relaxed(shieldrl::twtl::parse(formula));
    std::ofstream out(json_file);
    out << shieldrl::export_json(fsa);
    std::cout << "transition table written to " << json_file << '\n';
  }
  return 0;
}

int cmd_check(const shieldrl::ExperimentConfig& config) {
  shieldrl::Instance inst = shieldrl::build_instance(config);
  std::cout << "T = " << inst.horizon << '\n';
  std::cout << "product states: " << inst.product.num_states() << '\n';
  std::cout << "time-product size: " << inst.tp.size() << '\n';
  std::cout << "assumption check: " << inst.assumption_report.summary() << '\n';
  for (const auto& jump : inst.assumption_report.distance_jumps)
    std::cout << "  distance jump: pid " << jump.pid << " -(a" << jump.action
              << ")-> pid " << jump.succ << '\n';
  for (int pid : inst.assumption_report.unreachable)
    std::cout << "  infinite distance: pid " << pid << '\n';
  std::cout << "initial condition (eps_est=" << config.eps_est
            << ", pr_des=" << config.pr_des << "): "
            << (inst.initial_condition_ok ? "PASS" : "FAIL") << '\n';
  return inst.assumption_report.pass && inst.initial_condition_ok ? 0 : 1;
}

int cmd_train(const shieldrl::ExperimentConfig& config) {
  shieldrl::CaseResult result = shieldrl::run_case(config);
  std::cout << "case " << result.name << " -> " << result.outdir << '\n';
  if (!result.scaling.empty()) {
    for (std::size_t i = 0; i < result.scaling.size(); ++i) {
      const auto& row = result.scaling[i];
      std::cout << "  deadline " << row.deadline << ": T = " << row.horizon
                << ", product states = " << row.product_states
                << ", time-product size = " << row.time_product_size
                << ", success ratio = " << result.seeds[i].success_ratio
                << '\n';
    }
    return 0;
  }
  if (!result.plain_trajectory.empty()) {
    std::cout << "  greedy trajectory of " << result.plain_trajectory.size()
              << " states written\n";
    return 0;
  }
  for (const auto& seed : result.seeds)
    std::cout << "  seed " << seed.seed
              << ": success ratio = " << seed.success_ratio
              << ", avg reward (last window) = " << seed.avg_reward_last_window
              << ", wall clock = " << seed.wall_clock_s << "s\n";
  std::cout << "  mean success ratio = " << result.mean_success_ratio << '\n';
  return 0;
}

int cmd_sweep(const shieldrl::ExperimentConfig& config,
              std::vector<double> eps_values, std::vector<double> pr_values) {
  if (eps_values.empty()) eps_values = {0.1, 0.15, 0.2};
  if (pr_values.empty()) pr_values = {0.5, 0.6, 0.7};
  shieldrl::SweepResult result = shieldrl::sweep(config, eps_values, pr_values);
  std::cout << "sweep written to " << result.csv_path << '\n';
  for (const auto& cell : result.cells)
    std::cout << "  (eps_est=" << cell.eps_est << ", pr_des=" << cell.pr_des
              << "): success ratio = " << cell.success_ratio
              << ", avg reward = " << cell.avg_reward_last_window << '\n';
  return 0;
}

int cmd_oracle(const shieldrl::ExperimentConfig& config,
               std::vector<double> pr_values) {
  if (pr_values.empty()) pr_values = {0.5, 0.7, 0.9};
  shieldrl::OracleReport report = shieldrl::run_oracle(config, pr_values);
  std::cout << report.summary();
  bool ok = report.assumptions_pass && report.bound_violations == 0;
  for (const auto& t : report.theorem) ok = ok && t.holds;
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Temporal-logic constrained Q-learning with per-episode satisfaction "
      "guarantees"};
  app.require_subcommand(1);

  std::string formula, dot_file, json_file;
  auto* compile =
      app.add_subcommand("compile", "compile a formula and print T + automaton");
  compile->add_option("formula", formula, "formula text")->required();
  compile->add_option("--dot", dot_file, "write DOT here instead of stdout");
  compile->add_option("--json", json_file, "also dump the transition table");

  std::string source, outdir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int episodes = 0;
  std::vector<double> eps_values, pr_values;

  auto* check = app.add_subcommand("check", "assumption and entry-bound report");
  check->add_option("config", source)->required();

  auto* train = app.add_subcommand("train", "run a learning case");
  train->add_option("config", source)->required();
  train->add_option("--outdir", outdir);
  train->add_option("--episodes", episodes);
  train->add_option("--seed", seed)->each([&](const std::string&) {
    seed_set = true;
  });

  auto* sweep_cmd = app.add_subcommand("sweep", "run the (eps_est, pr_des) grid");
  sweep_cmd->add_option("config", source)->required();
  sweep_cmd->add_option("--outdir", outdir);
  sweep_cmd->add_option("--episodes", episodes);
  sweep_cmd->add_option("--eps", eps_values, "eps_est values");
  sweep_cmd->add_option("--pr", pr_values, "pr_des values");

  auto* oracle = app.add_subcommand("oracle", "exact bound-vs-DP comparison");
  oracle->add_option("config", source)->required();
  oracle->add_option("--pr", pr_values, "pr_des values for the guarantee check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed()) return cmd_compile(formula, dot_file, json_file);
    shieldrl::ExperimentConfig config = load_config(source);
    apply_overrides(config, seed, seed_set, outdir, episodes);
    if (check->parsed()) return cmd_check(config);
    if (train->parsed()) return cmd_train(config);
    if (sweep_cmd->parsed()) return cmd_sweep(config, eps_values, pr_values);
    if (oracle->parsed()) return cmd_oracle(config, pr_values);
  } catch (const shieldrl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
