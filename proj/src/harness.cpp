#include "shieldrl/harness.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "shieldrl/errors.hpp"

namespace fs = std::filesystem;

namespace shieldrl {

namespace {

// Approximation of the benchmark scenario: base bottom-left, pickup mid-grid,
// two delivery cells on the east edge, a handful of obstacles, a monitored
// band along the west and north edges with one high-value cell in the corner.
constexpr const char* kFig3Grid = R"json({
  "width": 8,
  "height": 8,
  "p_intended": 0.9,
  "obstacles": [[3, 2], [5, 3], [2, 5], [6, 5]],
  "regions": {
    "Base": [[1, 1]],
    "P": [[4, 4]],
    "D1": [[7, 1]],
    "D2": [[7, 7]]
  },
  "rewards": [
    {"cell": [0, 2], "value": 1.0},
    {"cell": [0, 3], "value": 1.0},
    {"cell": [0, 4], "value": 1.0},
    {"cell": [0, 5], "value": 1.0},
    {"cell": [0, 6], "value": 1.0},
    {"cell": [1, 7], "value": 1.0},
    {"cell": [2, 7], "value": 1.0},
    {"cell": [3, 7], "value": 1.0},
    {"cell": [0, 7], "value": 10.0}
  ]
})json";

constexpr const char* kOracleGrid = R"json({
  "width": 4,
  "height": 4,
  "p_intended": 0.9,
  "obstacles": [],
  "regions": {
    "A": [[1, 1]],
    "B": [[2, 2]]
  },
  "rewards": [
    {"cell": [3, 0], "value": 1.0}
  ]
})json";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& data) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << data;
}

RunMode mode_from_string(const std::string& text) {
  if (text == "shielded") return RunMode::Shielded;
  if (text == "task_reward") return RunMode::UnshieldedTaskOnly;
  if (text == "plain") return RunMode::PlainReward;
  throw ConfigError("unknown mode '" + text + "'");
}

std::string mode_to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Shielded:
      return "shielded";
    case RunMode::UnshieldedTaskOnly:
      return "task_reward";
    case RunMode::PlainReward:
      return "plain";
  }
  return "shielded";
}

std::string episodes_csv(const std::vector<EpisodeRecord>& episodes) {
  std::ostringstream out;
  out.precision(17);
  out << "episode,satisfied,satisfaction_time,tau,reward_sum,shield_steps\n";
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& e = episodes[i];
    out << i << ',' << (e.satisfied ? 1 : 0) << ',' << e.satisfaction_time
        << ',';
    if (e.satisfied) out << e.tau;
    out << ',' << e.reward_sum << ',' << e.shield_steps << '\n';
  }
  return out.str();
}

double window_mean_reward(const std::vector<EpisodeRecord>& episodes,
                          int window) {
  if (episodes.empty()) return 0.0;
  std::size_t n = std::min<std::size_t>(window, episodes.size());
  double sum = 0.0;
  for (std::size_t i = episodes.size() - n; i < episodes.size(); ++i)
    sum += episodes[i].reward_sum;
  return sum / static_cast<double>(n);
}

}  // namespace

std::string output_root() {
  const char* env = std::getenv("SHIELDRL_OUT");
  return env && *env ? env : ".";
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string pickup_formula(int deadline) {
  std::ostringstream out;
  out << "[H^1 P]^[0," << deadline << "] . ([H^1 D1]^[0," << deadline
      << "] | [H^1 D2]^[0," << deadline << "]) . [H^1 Base]^[0," << deadline
      << "]";
  return out.str();
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  ExperimentConfig config =
      from_json(read_file(path), fs::path(path).parent_path().string());
  return config;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text,
                                             const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig config;
  try {
    config.name = j.value("name", std::string("config"));
    config.formula = j.at("formula").get<std::string>();
    if (j.contains("grid") && j.at("grid").is_string()) {
      fs::path grid_path = j.at("grid").get<std::string>();
      if (grid_path.is_relative() && !base_dir.empty())
        grid_path = fs::path(base_dir) / grid_path;
      config.grid = GridSpec::from_json(read_file(grid_path.string()));
      config.grid_source = grid_path.string();
    } else if (j.contains("grid")) {
      config.grid = GridSpec::from_json(j.at("grid").dump());
    } else {
      throw ConfigError("config requires a 'grid' (path or object)");
    }
    if (j.contains("eps_real")) config.eps_real = j.at("eps_real").get<double>();
    config.eps_est = j.value("eps_est", 0.1);
    config.pr_des = j.value("pr_des", 0.7);
    config.n_episodes = j.value("n_episodes", 50'000);
    config.gamma = j.value("gamma", 0.95);
    config.alpha = j.value("alpha", 0.1);
    config.alpha_inverse_visits =
        j.value("alpha_schedule", std::string("constant")) == "inverse_visits";
    config.explore_rate = j.value("explore_rate", 0.1);
    if (j.contains("seeds")) {
      config.seeds.clear();
      for (const auto& s : j.at("seeds"))
        config.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("start")) {
      auto& cell = j.at("start");
      config.start_cell = {cell.at(0).get<int>(), cell.at(1).get<int>()};
    }
    config.outdir = j.value("outdir", std::string());
    config.mode = mode_from_string(j.value("mode", std::string("shielded")));
    config.eval_window = j.value("eval_window", 5000);
    config.dump_qtable = j.value("dump_qtable", false);
    config.dump_acttable = j.value("dump_acttable", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  if (config.seeds.empty()) throw ConfigError("config requires at least one seed");
  if (config.n_episodes <= 0) throw ConfigError("n_episodes must be positive");
  if (config.eps_est < 0.0 || config.eps_est >= 1.0)
    throw ConfigError("eps_est must lie in [0,1)");
  if (config.pr_des < 0.0 || config.pr_des >= 1.0)
    throw ConfigError("pr_des must lie in [0,1)");
  return config;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["formula"] = formula;
  j["grid"] = nlohmann::json::parse(effective_grid().to_json());
  j["grid_source"] = grid_source;
  if (eps_real) j["eps_real"] = *eps_real;
  j["eps_est"] = eps_est;
  j["pr_des"] = pr_des;
  j["n_episodes"] = n_episodes;
  j["gamma"] = gamma;
  j["alpha"] = alpha;
  j["alpha_schedule"] = alpha_inverse_visits ? "inverse_visits" : "constant";
  j["explore_rate"] = explore_rate;
  j["seeds"] = seeds;
  if (start_cell) j["start"] = {start_cell->first, start_cell->second};
  j["outdir"] = outdir;
  j["mode"] = mode_to_string(mode);
  j["eval_window"] = eval_window;
  return j.dump(2);
}

GridSpec ExperimentConfig::effective_grid() const {
  GridSpec grid_spec = grid;
  if (eps_real) grid_spec.p_intended = 1.0 - *eps_real;
  return grid_spec;
}

std::vector<std::string> preset_names() {
  return {"case1", "case2", "case3", "case4", "case5", "oracle4x4"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig config;
  config.name = name;
  config.grid = GridSpec::from_json(kFig3Grid);
  config.grid_source = "(builtin fig3)";
  config.formula = pickup_formula(20);
  config.eps_real = 0.1;
  config.outdir = "out/" + name;
  if (name == "case1") {
    config.seeds = {1, 2, 3, 4, 5};
  } else if (name == "case2") {
    config.mode = RunMode::PlainReward;
    config.n_episodes = 15'000;
  } else if (name == "case3") {
    config.mode = RunMode::UnshieldedTaskOnly;
  } else if (name == "case4") {
    // Base cell of the sweep; `sweep` varies eps_est and pr_des.
  } else if (name == "case5") {
    config.eps_est = 0.15;
  } else if (name == "oracle4x4") {
    config.grid = GridSpec::from_json(kOracleGrid);
    config.grid_source = "(builtin oracle4x4)";
    config.formula = "[H^1 A]^[0,8] . [H^1 B]^[0,8]";
    config.n_episodes = 2000;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return config;
}

Instance build_instance(const ExperimentConfig& config) {
  Instance inst;
  inst.ast = twtl::parse(config.formula);
  long long T = twtl::time_bound(inst.ast);
  if (T < 1 || T > 100'000)
    throw ConfigError("episode length " + std::to_string(T) +
                      " is out of the supported range");
  inst.horizon = static_cast<int>(T);
  inst.fsa = compile_relaxed(inst.ast);
  inst.grid = build_grid(config.effective_grid());
  inst.product = build_product(inst.grid.mdp, inst.fsa);
  inst.tp = build_time_product(inst.product, inst.horizon);
  inst.tp.eps = config.eps_est;
  inst.tp.distance =
      distance_to_accepting(inst.product, inst.grid.knowledge, config.eps_est);
  inst.assumption_report =
      check_assumptions(inst.product, inst.grid.knowledge, config.eps_est);
  inst.initial_condition_ok =
      check_initial_condition(inst.tp, config.eps_est, config.pr_des);
  if (inst.assumption_report.pass) {
    inst.act = prune_actions(inst.tp, inst.grid.knowledge,
                             {config.eps_est, config.pr_des, inst.horizon});
    inst.go_action =
        go_policy_table(inst.product, inst.grid.knowledge, config.eps_est);
  }

  if (config.start_cell) {
    inst.start_state =
        inst.grid.state_at(config.start_cell->first, config.start_cell->second);
  } else if (auto it = config.grid.regions.find("Base");
             it != config.grid.regions.end()) {
    inst.start_state =
        inst.grid.state_at(it->second.front().first, it->second.front().second);
  } else {
    inst.start_state = 0;
  }
  return inst;
}

std::vector<double> dp_exact_reach(const ProductMdp& product, int horizon,
                                   const PolicyFn& policy) {
  int n = product.num_states();
  std::vector<double> value(static_cast<std::size_t>(n) * (horizon + 1), 0.0);
  auto at = [&](int pid, int k) -> double& {
    return value[static_cast<std::size_t>(pid) * (horizon + 1) + k];
  };
  for (int pid = 0; pid < n; ++pid)
    if (product.accepting[pid]) at(pid, 0) = 1.0;
  for (int k = 1; k <= horizon; ++k)
    for (int pid = 0; pid < n; ++pid) {
      if (product.accepting[pid]) {
        at(pid, k) = 1.0;
        continue;
      }
      int a = policy(pid, k);
      double sum = 0.0;
      for (const auto& o : product.transitions[pid][a])
        sum += o.prob * at(o.next, k - 1);
      at(pid, k) = sum;
    }
  return value;
}

ExactTransitions exact_grid_transitions(const GridSpec& spec) {
  spec.validate();
  GridModel model = build_grid(spec);
  Rational p_intended = rational_from_parameter(spec.p_intended);

  ExactTransitions exact;
  exact.rows.resize(model.mdp.num_states);
  for (int s = 0; s < model.mdp.num_states; ++s) {
    auto [x, y] = model.cell_of_state[s];
    std::vector<int> move_target(kGridActions, -1);
    std::vector<int> feasible_moves;
    for (int a = 0; a < kGridActions; ++a) {
      int nx = x + kGridMoves[a].first;
      int ny = y + kGridMoves[a].second;
      if (nx < 0 || nx >= spec.width || ny < 0 || ny >= spec.height) continue;
      int id = model.state_of_cell[static_cast<std::size_t>(ny) * spec.width + nx];
      if (id < 0) continue;
      move_target[a] = id;
      feasible_moves.push_back(id);
    }
    exact.rows[s].resize(kGridActions);
    for (int a = 0; a < kGridActions; ++a) {
      auto& row = exact.rows[s][a];
      int intended = move_target[a];
      if (intended >= 0 && feasible_moves.size() > 1) {
        Rational rest = (Rational(1) - p_intended) /
                        Rational(static_cast<long long>(feasible_moves.size()) - 1);
        for (int target : feasible_moves) {
          Rational p = target == intended ? p_intended : rest;
          if (p > 0) row.emplace_back(target, p);
        }
      } else {
        Rational p =
            Rational(1) / Rational(static_cast<long long>(feasible_moves.size()));
        for (int target : feasible_moves) row.emplace_back(target, p);
      }
    }
  }
  return exact;
}

namespace {

std::vector<Rational> dp_rational_impl(
    const ProductMdp& product, int horizon, const ExactTransitions& exact,
    const std::function<void(int pid, int k, const std::vector<Rational>& prev,
                             Rational& out)>& step) {
  int n = product.num_states();
  std::vector<Rational> prev(n), curr(n);
  std::vector<Rational> all(static_cast<std::size_t>(n) * (horizon + 1));
  for (int pid = 0; pid < n; ++pid) {
    prev[pid] = product.accepting[pid] ? 1 : 0;
    all[static_cast<std::size_t>(pid) * (horizon + 1)] = prev[pid];
  }
  for (int k = 1; k <= horizon; ++k) {
    for (int pid = 0; pid < n; ++pid) {
      if (product.accepting[pid]) {
        curr[pid] = 1;
      } else {
        step(pid, k, prev, curr[pid]);
      }
      all[static_cast<std::size_t>(pid) * (horizon + 1) + k] = curr[pid];
    }
    std::swap(prev, curr);
  }
  (void)exact;
  return all;
}

Rational action_value(const ProductMdp& product, const ExactTransitions& exact,
                      const std::vector<Rational>& prev, int pid, int action) {
  int s = product.states[pid].mdp_state;
  Rational sum = 0;
  for (const auto& [next_s, p] : exact.rows[s][action])
    sum += p * prev[product.step_pid(pid, next_s)];
  return sum;
}

}  // namespace

std::vector<Rational> dp_exact_reach_rational(const ProductMdp& product,
                                              int horizon,
                                              const PolicyFn& policy,
                                              const ExactTransitions& exact) {
  return dp_rational_impl(
      product, horizon, exact,
      [&](int pid, int k, const std::vector<Rational>& prev, Rational& out) {
        out = action_value(product, exact, prev, pid, policy(pid, k));
      });
}

std::vector<Rational> dp_worst_case_shielded(const ProductMdp& product,
                                             const ActTable& act,
                                             const std::vector<int>& go_action,
                                             int horizon,
                                             const ExactTransitions& exact) {
  return dp_rational_impl(
      product, horizon, exact,
      [&](int pid, int k, const std::vector<Rational>& prev, Rational& out) {
        std::uint32_t mask = act.mask(pid, k);
        if (mask == 0) {
          int a = go_action[pid];
          out = a < 0 ? Rational(0) : action_value(product, exact, prev, pid, a);
          return;
        }
        bool first = true;
        for (int a = 0; a < product.num_actions; ++a) {
          if (!((mask >> a) & 1u)) continue;
          Rational v = action_value(product, exact, prev, pid, a);
          if (first || v < out) {
            out = std::move(v);
            first = false;
          }
        }
      });
}

std::string OracleReport::summary() const {
  std::ostringstream out;
  out << "assumptions: " << (assumptions_pass ? "pass" : "FAIL")
      << "; initial condition: " << (initial_condition_ok ? "pass" : "FAIL")
      << "; bound comparisons: " << bound_comparisons
      << ", violations: " << bound_violations << '\n';
  for (const auto& t : theorem)
    out << "  pr_des=" << t.pr_des << ": initial "
        << (t.initial_condition_ok ? "ok" : "FAIL") << ", guarantee "
        << (t.holds ? "holds" : "VIOLATED") << '\n';
  return out.str();
}

OracleReport run_oracle(const ExperimentConfig& config,
                        const std::vector<double>& pr_des_list) {
  Instance inst = build_instance(config);
  OracleReport report;
  report.assumptions_pass = inst.assumption_report.pass;
  report.initial_condition_ok = inst.initial_condition_ok;

  ExactTransitions exact = exact_grid_transitions(config.effective_grid());
  std::vector<int> go =
      go_policy_table(inst.product, inst.grid.knowledge, config.eps_est);
  PolicyFn go_fn = [&](int pid, int) {
    return go[pid] < 0 ? 0 : go[pid];
  };
  std::vector<Rational> reach =
      dp_exact_reach_rational(inst.product, inst.horizon, go_fn, exact);
  Rational eps = rational_from_parameter(config.eps_est);
  for (int pid = 0; pid < inst.product.num_states(); ++pid)
    for (int k = 0; k <= inst.horizon; ++k) {
      Rational bound =
          exact_reach_lower_bound(k, inst.tp.distance[pid], eps);
      ++report.bound_comparisons;
      if (reach[static_cast<std::size_t>(pid) * (inst.horizon + 1) + k] < bound)
        ++report.bound_violations;
    }

  for (double pr_des : pr_des_list) {
    ActTable act = prune_actions(inst.tp, inst.grid.knowledge,
                                 {config.eps_est, pr_des, inst.horizon});
    std::vector<Rational> worst =
        dp_worst_case_shielded(inst.product, act, go, inst.horizon, exact);
    Rational pr = rational_from_parameter(pr_des);
    bool holds = true;
    for (int s = 0; s < inst.product.num_mdp_states; ++s) {
      int pid = inst.product.init[s];
      if (worst[static_cast<std::size_t>(pid) * (inst.horizon + 1) +
                inst.horizon] < pr) {
        holds = false;
        break;
      }
    }
    report.theorem.push_back(
        {pr_des, check_initial_condition(inst.tp, config.eps_est, pr_des),
         holds});
  }
  return report;
}

namespace {

nlohmann::json seed_result_json(const SeedResult& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["success_ratio"] = r.success_ratio;
  j["avg_reward_last_window"] = r.avg_reward_last_window;
  j["satisfied_episodes"] = r.satisfied_episodes;
  j["wall_clock_s"] = r.wall_clock_s;
  return j;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& config,
                    const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  std::string config_json = config.to_json();
  manifest["config"] = nlohmann::json::parse(config_json);
  manifest["config_sha256"] = sha256_hex(config_json);
  manifest["formula_sha256"] = sha256_hex(config.formula);
  manifest["grid_sha256"] = sha256_hex(config.effective_grid().to_json());
  manifest["outputs"] = outputs;
  write_file(dir / "manifest.json", manifest.dump(2));
}

CaseResult run_plain_case(const ExperimentConfig& config, const fs::path& dir) {
  CaseResult result;
  result.name = config.name;
  GridModel grid = build_grid(config.effective_grid());
  int start = 0;
  if (config.start_cell)
    start = grid.state_at(config.start_cell->first, config.start_cell->second);
  else if (auto it = config.grid.regions.find("Base");
           it != config.grid.regions.end())
    start = grid.state_at(it->second.front().first, it->second.front().second);

  twtl::Ast ast = twtl::parse(config.formula);
  int T = static_cast<int>(twtl::time_bound(ast));
  result.horizon = T;

  TrainConfig tc;
  tc.n_episodes = config.n_episodes;
  tc.gamma = config.gamma;
  tc.alpha = config.alpha;
  tc.alpha_inverse_visits = config.alpha_inverse_visits;
  tc.explore_rate = config.explore_rate;
  tc.seed = config.seeds.front();
  tc.start_state = start;

  auto t0 = std::chrono::steady_clock::now();
  PlainTrainResult plain = train_plain(grid.mdp, T, tc);
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  result.plain_trajectory = rollout_greedy_intended(grid.mdp, plain.q, start, T);

  std::ostringstream csv;
  csv.precision(17);
  csv << "episode,reward_sum\n";
  for (std::size_t i = 0; i < plain.episode_rewards.size(); ++i)
    csv << i << ',' << plain.episode_rewards[i] << '\n';
  write_file(dir / "episodes.csv", csv.str());

  std::ostringstream traj;
  traj << "step,x,y\n";
  for (std::size_t i = 0; i < result.plain_trajectory.size(); ++i) {
    auto [x, y] = grid.cell_of_state[result.plain_trajectory[i]];
    traj << i << ',' << x << ',' << y << '\n';
  }
  write_file(dir / "trajectory.csv", traj.str());

  double window_sum = 0.0;
  std::size_t n =
      std::min<std::size_t>(config.eval_window, plain.episode_rewards.size());
  for (std::size_t i = plain.episode_rewards.size() - n;
       i < plain.episode_rewards.size(); ++i)
    window_sum += plain.episode_rewards[i];

  SeedResult seed_result;
  seed_result.seed = tc.seed;
  seed_result.avg_reward_last_window = n ? window_sum / n : 0.0;
  seed_result.wall_clock_s = wall;
  result.seeds.push_back(seed_result);
  result.mean_reward_last_window = seed_result.avg_reward_last_window;

  nlohmann::json summary;
  summary["name"] = config.name;
  summary["mode"] = mode_to_string(config.mode);
  summary["T"] = T;
  summary["avg_reward_last_window"] = seed_result.avg_reward_last_window;
  summary["wall_clock_s"] = wall;
  write_file(dir / "summary.json", summary.dump(2));
  write_manifest(dir, config,
                 {"episodes.csv", "trajectory.csv", "summary.json"});
  result.outdir = dir.string();
  return result;
}

CaseResult run_scaling_case(const ExperimentConfig& config,
                            const fs::path& dir) {
  CaseResult result;
  result.name = config.name;
  std::vector<std::string> outputs;
  for (int deadline : {20, 30, 40}) {
    ExperimentConfig variant = config;
    variant.formula = pickup_formula(deadline);
    Instance inst = build_instance(variant);
    if (!inst.assumption_report.pass)
      throw AssumptionViolation(inst.assumption_report.summary());
    if (!inst.initial_condition_ok)
      throw AssumptionViolation("initial-state reachability bound below pr_des");

    TrainConfig tc;
    tc.n_episodes = variant.n_episodes;
    tc.gamma = variant.gamma;
    tc.alpha = variant.alpha;
    tc.alpha_inverse_visits = variant.alpha_inverse_visits;
    tc.explore_rate = variant.explore_rate;
    tc.seed = variant.seeds.front();
    tc.start_state = inst.start_state;
    TrainResult train_result =
        train(inst.tp, inst.act, inst.go_action, inst.grid.mdp, tc);

    int satisfied = 0;
    for (const auto& e : train_result.episodes) satisfied += e.satisfied;
    CaseResult::Scaling row;
    row.deadline = deadline;
    row.horizon = inst.horizon;
    row.product_states = inst.product.num_states();
    row.time_product_size = inst.tp.size();
    result.scaling.push_back(row);

    SeedResult seed_result;
    seed_result.seed = tc.seed;
    seed_result.success_ratio =
        static_cast<double>(satisfied) / tc.n_episodes;
    seed_result.satisfied_episodes = satisfied;
    seed_result.avg_reward_last_window =
        window_mean_reward(train_result.episodes, variant.eval_window);
    result.seeds.push_back(seed_result);

    std::string file = "episodes_deadline" + std::to_string(deadline) + ".csv";
    write_file(dir / file, episodes_csv(train_result.episodes));
    outputs.push_back(file);
  }

  nlohmann::json summary;
  summary["name"] = config.name;
  auto& rows = summary["scaling"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.scaling.size(); ++i) {
    const auto& row = result.scaling[i];
    nlohmann::json r;
    r["deadline"] = row.deadline;
    r["T"] = row.horizon;
    r["product_states"] = row.product_states;
    r["time_product_size"] = row.time_product_size;
    r["success_ratio"] = result.seeds[i].success_ratio;
    r["avg_reward_last_window"] = result.seeds[i].avg_reward_last_window;
    rows.push_back(std::move(r));
  }
  write_file(dir / "summary.json", summary.dump(2));
  outputs.push_back("summary.json");
  write_manifest(dir, config, outputs);
  result.outdir = dir.string();
  return result;
}

}  // namespace

CaseResult run_case(const ExperimentConfig& config) {
  fs::path dir = config.outdir.empty()
                     ? fs::path(output_root()) / "out" / config.name
                     : fs::path(config.outdir);
  if (dir.is_relative()) dir = fs::path(output_root()) / dir;
  fs::create_directories(dir);

  if (config.mode == RunMode::PlainReward) return run_plain_case(config, dir);
  if (config.name == "case5") return run_scaling_case(config, dir);

  Instance inst = build_instance(config);
  if (config.mode == RunMode::Shielded) {
    if (!inst.assumption_report.pass)
      throw AssumptionViolation(inst.assumption_report.summary());
    if (!inst.initial_condition_ok)
      throw AssumptionViolation(
          "initial-state reachability bound below pr_des; the per-episode "
          "guarantee would be void");
  }

  CaseResult result;
  result.name = config.name;
  result.horizon = inst.horizon;
  result.product_states = inst.product.num_states();
  result.time_product_size = inst.tp.size();

  ActTable unshielded_act;
  std::vector<int> dummy_go;
  if (config.mode == RunMode::UnshieldedTaskOnly) {
    unshielded_act =
        ActTable(inst.product.num_states(), inst.horizon, inst.product.num_actions);
    dummy_go.assign(inst.product.num_states(), -1);
  }
  const ActTable& act =
      config.mode == RunMode::Shielded ? inst.act : unshielded_act;
  const std::vector<int>& go =
      config.mode == RunMode::Shielded ? inst.go_action : dummy_go;

  std::vector<std::string> outputs;
  for (std::uint64_t seed : config.seeds) {
    TrainConfig tc;
    tc.n_episodes = config.n_episodes;
    tc.gamma = config.gamma;
    tc.alpha = config.alpha;
    tc.alpha_inverse_visits = config.alpha_inverse_visits;
    tc.explore_rate = config.explore_rate;
    tc.seed = seed;
    tc.start_state = inst.start_state;
    tc.shield_enabled = config.mode == RunMode::Shielded;
    tc.accept_state_reward = config.mode == RunMode::UnshieldedTaskOnly;

    auto t0 = std::chrono::steady_clock::now();
    TrainResult train_result = train(inst.tp, act, go, inst.grid.mdp, tc);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    SeedResult seed_result;
    seed_result.seed = seed;
    for (const auto& e : train_result.episodes)
      seed_result.satisfied_episodes += e.satisfied ? 1 : 0;
    seed_result.success_ratio =
        static_cast<double>(seed_result.satisfied_episodes) / config.n_episodes;
    seed_result.avg_reward_last_window =
        window_mean_reward(train_result.episodes, config.eval_window);
    seed_result.wall_clock_s = wall;
    result.seeds.push_back(seed_result);

    std::string file = "episodes_seed" + std::to_string(seed) + ".csv";
    write_file(dir / file, episodes_csv(train_result.episodes));
    outputs.push_back(file);
    if (config.dump_qtable) {
      std::string qfile = "qtable_seed" + std::to_string(seed) + ".csv";
      write_file(dir / qfile, train_result.qtable.to_csv());
      outputs.push_back(qfile);
    }
  }
  for (const auto& s : result.seeds) {
    result.mean_success_ratio += s.success_ratio;
    result.mean_reward_last_window += s.avg_reward_last_window;
  }
  result.mean_success_ratio /= static_cast<double>(result.seeds.size());
  result.mean_reward_last_window /= static_cast<double>(result.seeds.size());

  write_file(dir / "fsa.dot", export_dot(inst.fsa));
  outputs.push_back("fsa.dot");
  if (config.dump_acttable && config.mode == RunMode::Shielded) {
    write_file(dir / "acttable.csv", inst.act.to_csv());
    outputs.push_back("acttable.csv");
  }

  nlohmann::json summary;
  summary["name"] = config.name;
  summary["mode"] = mode_to_string(config.mode);
  summary["T"] = inst.horizon;
  summary["product_states"] = result.product_states;
  summary["time_product_size"] = result.time_product_size;
  summary["eps_est"] = config.eps_est;
  summary["pr_des"] = config.pr_des;
  summary["n_episodes"] = config.n_episodes;
  summary["eval_window"] = config.eval_window;
  auto& seeds_json = summary["seeds"] = nlohmann::json::array();
  for (const auto& s : result.seeds) seeds_json.push_back(seed_result_json(s));
  summary["mean_success_ratio"] = result.mean_success_ratio;
  summary["mean_reward_last_window"] = result.mean_reward_last_window;
  write_file(dir / "summary.json", summary.dump(2));
  outputs.push_back("summary.json");
  write_manifest(dir, config, outputs);
  result.outdir = dir.string();
  return result;
}

SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<double>& eps_est_values,
                  const std::vector<double>& pr_des_values) {
  fs::path dir = base.outdir.empty()
                     ? fs::path(output_root()) / "out" / (base.name + "_sweep")
                     : fs::path(base.outdir);
  if (dir.is_relative()) dir = fs::path(output_root()) / dir;
  fs::create_directories(dir);

  struct Cell {
    double eps_est;
    double pr_des;
    ExperimentConfig config;
  };
  std::vector<Cell> cells;
  std::uint64_t seed_state = base.seeds.front();
  for (double eps : eps_est_values)
    for (double pr : pr_des_values) {
      ExperimentConfig config = base;
      config.eps_est = eps;
      config.pr_des = pr;
      std::ostringstream name;
      name << "eps" << eps << "_pr" << pr;
      config.name = base.name + "_" + name.str();
      config.outdir = (dir / name.str()).string();
      config.seeds = {splitmix64(seed_state)};
      cells.push_back({eps, pr, std::move(config)});
    }

  std::vector<std::future<SweepCell>> futures;
  futures.reserve(cells.size());
  for (const auto& cell : cells)
    futures.push_back(std::async(std::launch::async, [&cell]() {
      CaseResult r = run_case(cell.config);
      return SweepCell{cell.eps_est, cell.pr_des, r.mean_success_ratio,
                       r.mean_reward_last_window};
    }));

  SweepResult result;
  for (auto& f : futures) result.cells.push_back(f.get());

  std::ostringstream csv;
  csv.precision(10);
  csv << "metric";
  for (const auto& c : result.cells)
    csv << ",(" << c.eps_est << ";" << c.pr_des << ")";
  csv << "\nsuccess_ratio";
  for (const auto& c : result.cells) csv << ',' << c.success_ratio;
  csv << "\navg_reward_last_window";
  for (const auto& c : result.cells) csv << ',' << c.avg_reward_last_window;
  csv << '\n';
  fs::path csv_path = dir / "sweep.csv";
  write_file(csv_path, csv.str());
  result.csv_path = csv_path.string();
  return result;
}

CompileReport compile_report(const std::string& formula) {
  CompileReport report;
  twtl::Ast ast = twtl::parse(formula);
  report.horizon = twtl::time_bound(ast);
  report.normal_form = twtl::print(ast);
  Fsa fsa = compile_relaxed(ast);
  report.fsa_states = fsa.num_states;
  report.alphabet_atoms = static_cast<int>(fsa.atoms.size());
  report.dot = export_dot(fsa);
  return report;
}

}  // namespace shieldrl
