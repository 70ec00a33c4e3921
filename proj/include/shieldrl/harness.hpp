#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shieldrl/learner.hpp"
#include "shieldrl/model.hpp"
#include "shieldrl/product.hpp"
#include "shieldrl/shield.hpp"
#include "shieldrl/twtl.hpp"

namespace shieldrl {

// Training mode of a case run.
enum class RunMode {
  Shielded,            // constraint + shield (the full algorithm)
  UnshieldedTaskOnly,  // reward 1 at accepting states, no shield
  PlainReward,         // bare MDP Q-learning, constraint ignored
};

struct ExperimentConfig {
  std::string name = "config";
  std::string formula;
  GridSpec grid;
  std::string grid_source = "(inline)";
  std::optional<double> eps_real;  // sets p_intended = 1 - eps_real
  double eps_est = 0.1;
  double pr_des = 0.7;
  int n_episodes = 50'000;
  double gamma = 0.95;
  double alpha = 0.1;
  bool alpha_inverse_visits = false;
  double explore_rate = 0.1;
  std::vector<std::uint64_t> seeds = {1};
  std::optional<std::pair<int, int>> start_cell;  // default: first Base cell
  std::string outdir;
  RunMode mode = RunMode::Shielded;
  int eval_window = 5000;  // reward averaging window (last episodes)
  bool dump_qtable = false;
  bool dump_acttable = false;

  // Reads a config document; a "grid" string is resolved as a path relative
  // to the config file. Throws ConfigError.
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json(const std::string& text,
                                    const std::string& base_dir);
  std::string to_json() const;

  GridSpec effective_grid() const;  // grid with eps_real applied
};

// Built-in configurations:
//   case1     shielded pickup-delivery run (eps_est 0.1, pr_des 0.7)
//   case2     plain reward-chasing Q-learning, constraint ignored
//   case3     unshielded learning with acceptance-only reward
//   case4     the 3x3 sweep base config
//   case5     window-scaling report config (eps_est 0.15)
//   oracle4x4 small instance checked exactly against the oracles
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// The pickup-delivery formula with all window deadlines set to `deadline`.
std::string pickup_formula(int deadline);

// A fully built instance, ready for training.
struct Instance {
  twtl::Ast ast;
  Fsa fsa;
  int horizon = 0;  // T
  GridModel grid;
  ProductMdp product;
  TimeProductMdp tp;
  AssumptionReport assumption_report;
  bool initial_condition_ok = false;
  ActTable act;
  std::vector<int> go_action;
  int start_state = 0;
};

// Compiles, composes and checks; shield tables are built only when the
// assumption report passes. Does not throw on check failure - callers decide
// (run_case aborts, `check` reports).
Instance build_instance(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Exact reachability oracles (test-side: these read the true probabilities).

using PolicyFn = std::function<int(int pid, int k)>;

// Probability of reaching the accepting set within k steps under the given
// policy; backward induction over the product, indexed [pid * (T+1) + k].
std::vector<double> dp_exact_reach(const ProductMdp& product, int horizon,
                                   const PolicyFn& policy);

// Transition rows of the grid model over exact rationals (same enumeration as
// build_grid, with p_intended recovered as a small rational).
struct ExactTransitions {
  std::vector<std::vector<std::vector<std::pair<int, Rational>>>> rows;  // [s][a]
};
ExactTransitions exact_grid_transitions(const GridSpec& spec);

std::vector<Rational> dp_exact_reach_rational(const ProductMdp& product,
                                              int horizon,
                                              const PolicyFn& policy,
                                              const ExactTransitions& exact);

// Worst case over every action choice the shield permits (the fallback policy
// where the permitted set is empty).
std::vector<Rational> dp_worst_case_shielded(const ProductMdp& product,
                                             const ActTable& act,
                                             const std::vector<int>& go_action,
                                             int horizon,
                                             const ExactTransitions& exact);

struct OracleReport {
  bool assumptions_pass = false;
  bool initial_condition_ok = false;
  long long bound_comparisons = 0;
  long long bound_violations = 0;  // dp < lower bound occurrences
  struct TheoremCheck {
    double pr_des;
    bool initial_condition_ok;
    bool holds;  // worst-case satisfaction probability >= pr_des at entry
  };
  std::vector<TheoremCheck> theorem;
  std::string summary() const;
};

// Exact-arithmetic comparison of the reach lower bound against the true
// reachability of the fallback policy, plus the per-episode guarantee of the
// shielded behavior for each pr_des.
OracleReport run_oracle(const ExperimentConfig& config,
                        const std::vector<double>& pr_des_list);

// ---------------------------------------------------------------------------
// Case execution and result emission.

struct SeedResult {
  std::uint64_t seed = 0;
  double success_ratio = 0.0;
  double avg_reward_last_window = 0.0;
  int satisfied_episodes = 0;
  double wall_clock_s = 0.0;
};

struct CaseResult {
  std::string name;
  int horizon = 0;
  int product_states = 0;
  long long time_product_size = 0;
  std::vector<SeedResult> seeds;
  double mean_success_ratio = 0.0;
  double mean_reward_last_window = 0.0;
  std::vector<int> plain_trajectory;  // PlainReward mode: greedy rollout states
  struct Scaling {
    int deadline;
    int horizon;
    int product_states;
    long long time_product_size;
  };
  std::vector<Scaling> scaling;  // case5 report
  std::string outdir;
};

// Runs a case end to end and writes episodes.csv (per seed), summary.json,
// fsa.dot and manifest.json under the configured output directory. Aborts
// with AssumptionViolation / ConfigError when the preconditions fail.
CaseResult run_case(const ExperimentConfig& config);

struct SweepCell {
  double eps_est;
  double pr_des;
  double success_ratio;
  double avg_reward_last_window;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // row-major over (eps list) x (pr list)
  std::string csv_path;
};

// Runs the (eps_est, pr_des) grid concurrently, one sequential trainer per
// cell with an independent rng stream, and writes a table-shaped CSV.
SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<double>& eps_est_values,
                  const std::vector<double>& pr_des_values);

struct CompileReport {
  long long horizon = 0;
  int fsa_states = 0;
  int alphabet_atoms = 0;
  std::string normal_form;
  std::string dot;
};

CompileReport compile_report(const std::string& formula);

// SHA-256 hex digest of a byte string (content hashes in run manifests).
std::string sha256_hex(const std::string& data);

// Output root: $SHIELDRL_OUT when set, else the current directory.
std::string output_root();

}  // namespace shieldrl
