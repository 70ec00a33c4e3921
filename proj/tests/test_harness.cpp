#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "shieldrl/errors.hpp"
#include "shieldrl/harness.hpp"

using namespace shieldrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_tmp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("shieldrl_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct CsvStats {
  int episodes = 0;
  int satisfied = 0;
  std::vector<double> rewards;
};

CsvStats parse_episode_csv(const std::string& text) {
  CsvStats stats;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // episode
    std::getline(row, field, ',');
    stats.satisfied += field == "1";
    std::getline(row, field, ',');  // satisfaction_time
    std::getline(row, field, ',');  // tau
    std::getline(row, field, ',');
    stats.rewards.push_back(std::stod(field));
    ++stats.episodes;
  }
  return stats;
}

}  // namespace

TEST_CASE("compile report: pickup formula has T = 62") {
  CompileReport report = compile_report(pickup_formula(20));
  CHECK(report.horizon == 62);
  CHECK(report.fsa_states > 0);
  CHECK(report.alphabet_atoms == 4);
  CHECK(report.dot.find("digraph") != std::string::npos);
}

TEST_CASE("presets load and unknown names are rejected") {
  for (const auto& name : preset_names()) {
    ExperimentConfig config = preset(name);
    CHECK(config.name == name);
    CHECK_FALSE(config.formula.empty());
  }
  CHECK_THROWS_AS(preset("case9"), ConfigError);
}

TEST_CASE("config json round-trips through from_json") {
  ExperimentConfig config = preset("case1");
  config.seeds = {7, 8};
  ExperimentConfig reparsed = ExperimentConfig::from_json(config.to_json(), "");
  CHECK(reparsed.formula == config.formula);
  CHECK(reparsed.eps_est == config.eps_est);
  CHECK(reparsed.pr_des == config.pr_des);
  CHECK(reparsed.seeds == config.seeds);
  CHECK(reparsed.grid.width == 8);
  CHECK(reparsed.grid.regions.at("P") == config.grid.regions.at("P"));
  // eps_real was folded into the grid and echoed.
  CHECK(reparsed.effective_grid().p_intended ==
        doctest::Approx(config.effective_grid().p_intended));

  CHECK_THROWS_AS(ExperimentConfig::from_json("{}", ""), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{btfl", ""), ConfigError);
}

TEST_CASE("pickup instance on the 8x8 grid passes both checks") {
  ExperimentConfig config = preset("case1");
  Instance inst = build_instance(config);
  CHECK(inst.horizon == 62);
  CHECK(inst.assumption_report.pass);
  CHECK(inst.initial_condition_ok);
  CHECK(inst.tp.size() ==
        static_cast<long long>(inst.product.num_states()) * 62);
}

TEST_CASE("exact grid transitions mirror the double table") {
  GridSpec spec = preset("case1").effective_grid();
  GridModel model = build_grid(spec);
  ExactTransitions exact = exact_grid_transitions(spec);
  REQUIRE(exact.rows.size() == static_cast<std::size_t>(model.mdp.num_states));
  for (int s = 0; s < model.mdp.num_states; ++s)
    for (int a = 0; a < kGridActions; ++a) {
      const auto& dbl = model.mdp.transitions[s][a];
      const auto& rat = exact.rows[s][a];
      REQUIRE(dbl.size() == rat.size());
      Rational sum = 0;
      for (std::size_t i = 0; i < dbl.size(); ++i) {
        CHECK(dbl[i].next == rat[i].first);
        CHECK(to_double(rat[i].second) == doctest::Approx(dbl[i].prob));
        sum += rat[i].second;
      }
      CHECK(sum == 1);  // rows are exactly stochastic in rational arithmetic
    }
}

TEST_CASE("dp oracle: absorbing acceptance and one-step chains") {
  // 2-state chain: success probability 0.9 per attempt.
  Mdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 1;
  mdp.atoms = {"A"};
  mdp.labels = {{}, {"A"}};
  mdp.transitions = {{{{0, 0.1}, {1, 0.9}}}, {{{1, 1.0}}}};
  mdp.reward = {{0.0}, {0.0}};
  ProductMdp product =
      build_product(mdp, compile_relaxed(twtl::parse("[H^0 A]^[0,5]")));
  PolicyFn only_action = [](int, int) { return 0; };
  std::vector<double> value = dp_exact_reach(product, 5, only_action);
  int start = product.init[0];
  int accept = product.init[1];
  for (int k = 0; k <= 5; ++k)
    CHECK(value[static_cast<std::size_t>(accept) * 6 + k] == 1.0);
  CHECK(value[static_cast<std::size_t>(start) * 6 + 0] == 0.0);
  CHECK(value[static_cast<std::size_t>(start) * 6 + 1] ==
        doctest::Approx(0.9));
  // Monotone in k under a fixed policy.
  for (int k = 1; k <= 5; ++k)
    CHECK(value[static_cast<std::size_t>(start) * 6 + k] >=
          value[static_cast<std::size_t>(start) * 6 + k - 1]);
  CHECK(value[static_cast<std::size_t>(start) * 6 + 2] ==
        doctest::Approx(1.0 - 0.1 * 0.1));
}

TEST_CASE("oracle run on the 4x4 instance: no bound violations") {
  ExperimentConfig config = preset("oracle4x4");
  OracleReport report = run_oracle(config, {0.7});
  CHECK(report.assumptions_pass);
  CHECK(report.initial_condition_ok);
  CHECK(report.bound_comparisons > 0);
  CHECK(report.bound_violations == 0);
  REQUIRE(report.theorem.size() == 1);
  CHECK(report.theorem[0].initial_condition_ok);
  CHECK(report.theorem[0].holds);
  CHECK(report.summary().find("violations: 0") != std::string::npos);
}

TEST_CASE("run_case writes recomputable, reproducible outputs") {
  fs::path dir = fresh_tmp_dir("runcase");
  ExperimentConfig config = preset("oracle4x4");
  config.n_episodes = 400;
  config.seeds = {11};
  config.outdir = (dir / "a").string();
  CaseResult result = run_case(config);
  REQUIRE(result.seeds.size() == 1);

  std::string csv = slurp(dir / "a" / "episodes_seed11.csv");
  CsvStats stats = parse_episode_csv(csv);
  CHECK(stats.episodes == 400);
  CHECK(stats.satisfied == result.seeds[0].satisfied_episodes);
  CHECK(static_cast<double>(stats.satisfied) / 400 ==
        doctest::Approx(result.seeds[0].success_ratio));
  // Recompute the last-window mean from the CSV.
  double sum = 0.0;
  for (std::size_t i = stats.rewards.size() - 400; i < stats.rewards.size();
       ++i)
    sum += stats.rewards[i];
  CHECK(sum / 400 == doctest::Approx(result.seeds[0].avg_reward_last_window));

  CHECK(fs::exists(dir / "a" / "summary.json"));
  CHECK(fs::exists(dir / "a" / "fsa.dot"));
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(slurp(dir / "a" / "manifest.json").find("config_sha256") !=
        std::string::npos);

  // Byte-identical rerun.
  config.outdir = (dir / "b").string();
  run_case(config);
  CHECK(slurp(dir / "b" / "episodes_seed11.csv") == csv);
  fs::remove_all(dir);
}

TEST_CASE("run_case aborts when the task is unreachable") {
  ExperimentConfig config = preset("oracle4x4");
  // Wall off region B behind a ring of obstacles.
  config.grid.regions["A"] = {{0, 0}};
  config.grid.obstacles = {{1, 1}, {2, 1}, {3, 1}, {1, 2},
                           {3, 2}, {1, 3}, {2, 3}, {3, 3}};
  CHECK_THROWS_AS(run_case(config), AssumptionViolation);
}

TEST_CASE("sweep: single cell agrees with run_case") {
  fs::path dir = fresh_tmp_dir("sweep");
  ExperimentConfig base = preset("oracle4x4");
  base.n_episodes = 300;
  base.seeds = {5};
  base.outdir = (dir / "sweep").string();
  SweepResult sw = sweep(base, {0.1}, {0.7});
  REQUIRE(sw.cells.size() == 1);
  CHECK(fs::exists(sw.csv_path));

  // The sweep derives its cell seed deterministically from the base seed.
  std::uint64_t state = 5;
  ExperimentConfig single = preset("oracle4x4");
  single.n_episodes = 300;
  single.seeds = {splitmix64(state)};
  single.eps_est = 0.1;
  single.pr_des = 0.7;
  single.outdir = (dir / "single").string();
  CaseResult direct = run_case(single);
  CHECK(sw.cells[0].success_ratio ==
        doctest::Approx(direct.mean_success_ratio));
  CHECK(sw.cells[0].avg_reward_last_window ==
        doctest::Approx(direct.mean_reward_last_window));
  fs::remove_all(dir);
}

TEST_CASE("plain case emits a trajectory that parks on the reward cell") {
  fs::path dir = fresh_tmp_dir("plain");
  ExperimentConfig config = preset("case2");
  config.n_episodes = 4000;
  config.outdir = dir.string();
  CaseResult result = run_case(config);
  REQUIRE_FALSE(result.plain_trajectory.empty());
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "episodes.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sha256 matches a known digest") {
  // SHA-256 of the empty string.
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
