#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "shieldrl/errors.hpp"
#include "shieldrl/model.hpp"

using namespace shieldrl;

namespace {

GridSpec empty_grid(int width, int height) {
  GridSpec spec;
  spec.width = width;
  spec.height = height;
  spec.p_intended = 0.9;
  return spec;
}

double outcome_prob(const Mdp& mdp, int s, int a, int next) {
  for (const auto& o : mdp.transitions[s][a])
    if (o.next == next) return o.prob;
  return 0.0;
}

}  // namespace

TEST_CASE("interior cell: intended 0.9, eight others at 0.1/8") {
  GridModel model = build_grid(empty_grid(8, 8));
  int s = model.state_at(4, 4);
  int ne = model.state_at(5, 5);
  const auto& row = model.mdp.transitions[s][GridAction::NE];
  REQUIRE(row.size() == 9);
  CHECK(outcome_prob(model.mdp, s, GridAction::NE, ne) == doctest::Approx(0.9));
  for (const auto& o : row)
    if (o.next != ne) CHECK(o.prob == doctest::Approx(0.1 / 8));
}

TEST_CASE("corner cell: action N splits the remainder over E, NE, Stay") {
  GridModel model = build_grid(empty_grid(8, 8));
  int s = model.state_at(0, 0);
  const auto& row = model.mdp.transitions[s][GridAction::N];
  REQUIRE(row.size() == 4);  // N, NE, E, Stay
  CHECK(outcome_prob(model.mdp, s, GridAction::N, model.state_at(0, 1)) ==
        doctest::Approx(0.9));
  for (int other : {model.state_at(1, 0), model.state_at(1, 1), s})
    CHECK(outcome_prob(model.mdp, s, GridAction::N, other) ==
          doctest::Approx(0.1 / 3));
}

TEST_CASE("1x1 grid: every action stays put with probability 1") {
  GridModel model = build_grid(empty_grid(1, 1));
  REQUIRE(model.mdp.num_states == 1);
  for (int a = 0; a < kGridActions; ++a) {
    REQUIRE(model.mdp.transitions[0][a].size() == 1);
    CHECK(model.mdp.transitions[0][a][0].next == 0);
    CHECK(model.mdp.transitions[0][a][0].prob == doctest::Approx(1.0));
  }
}

TEST_CASE("rows are stochastic for every state-action pair") {
  GridSpec spec = empty_grid(8, 8);
  spec.obstacles = {{3, 2}, {5, 3}, {2, 5}};
  spec.regions["P"] = {{4, 4}};
  GridModel model = build_grid(spec);
  for (int s = 0; s < model.mdp.num_states; ++s)
    for (int a = 0; a < kGridActions; ++a) {
      double sum = 0.0;
      for (const auto& o : model.mdp.transitions[s][a]) {
        CHECK(o.prob > 0.0);
        sum += o.prob;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("empty-grid transitions respect the dihedral symmetries") {
  const int n = 4;
  GridModel model = build_grid(empty_grid(n, n));
  // The eight symmetries of the square, as cell maps.
  using Sym = std::pair<int, int> (*)(int, int, int);
  static const Sym syms[8] = {
      [](int x, int y, int m) { (void)m; return std::pair{x, y}; },
      [](int x, int y, int m) { return std::pair{m - x, y}; },
      [](int x, int y, int m) { return std::pair{x, m - y}; },
      [](int x, int y, int m) { return std::pair{m - x, m - y}; },
      [](int x, int y, int m) { (void)m; return std::pair{y, x}; },
      [](int x, int y, int m) { return std::pair{y, m - x}; },
      [](int x, int y, int m) { return std::pair{m - y, x}; },
      [](int x, int y, int m) { return std::pair{m - y, m - x}; },
  };
  for (const auto& sym : syms) {
    // Map each action through the symmetry by transforming its move vector.
    std::map<std::pair<int, int>, int> action_of_move;
    for (int a = 0; a < kGridActions; ++a)
      action_of_move[kGridMoves[a]] = a;
    auto mapped_action = [&](int a) {
      auto [dx, dy] = kGridMoves[a];
      auto [ox, oy] = sym(0, 0, 0);
      auto [tx, ty] = sym(dx, dy, 0);
      return action_of_move.at({tx - ox, ty - oy});
    };
    for (int s = 0; s < model.mdp.num_states; ++s) {
      auto [x, y] = model.cell_of_state[s];
      auto [sx, sy] = sym(x, y, n - 1);
      int ms = model.state_at(sx, sy);
      for (int a = 0; a < kGridActions; ++a) {
        int ma = mapped_action(a);
        for (const auto& o : model.mdp.transitions[s][a]) {
          auto [nx, ny] = model.cell_of_state[o.next];
          auto [mnx, mny] = sym(nx, ny, n - 1);
          double p =
              outcome_prob(model.mdp, ms, ma, model.state_at(mnx, mny));
          CHECK(p == doctest::Approx(o.prob));
        }
      }
    }
  }
}

TEST_CASE("labels and rewards follow the spec") {
  GridSpec spec = empty_grid(4, 4);
  spec.regions["P"] = {{2, 2}};
  spec.regions["Base"] = {{0, 0}};
  spec.rewards = {{{1, 1}, 10.0}};
  GridModel model = build_grid(spec);
  CHECK(model.mdp.labels[model.state_at(2, 2)] ==
        std::vector<std::string>{"P"});
  CHECK(model.mdp.labels[model.state_at(0, 0)] ==
        std::vector<std::string>{"Base"});
  CHECK(model.mdp.labels[model.state_at(3, 3)].empty());
  for (int a = 0; a < kGridActions; ++a) {
    CHECK(model.mdp.reward[model.state_at(1, 1)][a] == 10.0);
    CHECK(model.mdp.reward[model.state_at(0, 1)][a] == 0.0);
  }
  CHECK(model.mdp.atoms == std::vector<std::string>{"Base", "P"});
}

TEST_CASE("sampling: deterministic entries, reproducibility, frequencies") {
  GridModel unit = build_grid(empty_grid(1, 1));
  RngStream rng(5);
  for (int i = 0; i < 10; ++i)
    CHECK(sample_transition(unit.mdp, 0, GridAction::Stay, rng).first == 0);

  GridModel model = build_grid(empty_grid(8, 8));
  int s = model.state_at(4, 4);
  int intended = model.state_at(5, 5);

  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_transition(model.mdp, s, GridAction::NE, a).first ==
          sample_transition(model.mdp, s, GridAction::NE, b).first);

  RngStream mc(7);
  int hits = 0;
  const int trials = 100'000;
  for (int i = 0; i < trials; ++i)
    hits += sample_transition(model.mdp, s, GridAction::NE, mc).first == intended;
  CHECK(std::abs(hits / static_cast<double>(trials) - 0.9) < 0.01);

  CHECK_THROWS_AS(sample_transition(model.mdp, s, 99, mc), NoSuchAction);
  CHECK(sample_transition(model.mdp, s, GridAction::NE, mc).second == 0.0);
}

TEST_CASE("knowledge sets: likely nests by eps and within feasible") {
  GridSpec spec = empty_grid(8, 8);
  spec.obstacles = {{4, 5}};
  GridModel model = build_grid(spec);
  const KnowledgeSets& knowledge = model.knowledge;
  for (int s = 0; s < model.mdp.num_states; ++s)
    for (int a = 0; a < kGridActions; ++a) {
      auto likely_small = knowledge.likely(s, a, 0.05);
      auto likely_large = knowledge.likely(s, a, 0.3);
      const auto& feasible = knowledge.feasible(s, a);
      std::set<int> feasible_set(feasible.begin(), feasible.end());
      CHECK(std::includes(likely_large.begin(), likely_large.end(),
                          likely_small.begin(), likely_small.end()));
      for (int next : likely_large) CHECK(feasible_set.count(next) == 1);
    }
  // p_intended = 0.9: likely at eps=0.1 is exactly the intended cell.
  int s = model.state_at(2, 2);
  auto likely = knowledge.likely(s, GridAction::E, 0.1);
  REQUIRE(likely.size() == 1);
  CHECK(likely[0] == model.state_at(3, 2));
  CHECK(knowledge.likely(s, GridAction::E, 0.05).empty());
  CHECK_THROWS_AS(knowledge.likely(s, 0, 1.0), DomainError);
}

TEST_CASE("grid spec json round-trip and validation errors") {
  GridSpec spec = empty_grid(8, 8);
  spec.obstacles = {{3, 2}};
  spec.regions["Base"] = {{1, 1}};
  spec.rewards = {{{0, 7}, 10.0}};
  GridSpec reparsed = GridSpec::from_json(spec.to_json());
  CHECK(reparsed.width == 8);
  CHECK(reparsed.obstacles == spec.obstacles);
  CHECK(reparsed.regions.at("Base") == spec.regions.at("Base"));
  CHECK(reparsed.rewards.size() == 1);

  CHECK_THROWS_AS(GridSpec::from_json("{"), SpecError);
  CHECK_THROWS_AS(GridSpec::from_json(R"({"width": 0, "height": 3})"),
                  SpecError);
  CHECK_THROWS_AS(GridSpec::from_json(
                      R"({"width": 2, "height": 2,
                          "regions": {"P": [[5, 5]]}})"),
                  SpecError);
  CHECK_THROWS_AS(GridSpec::from_json(
                      R"({"width": 2, "height": 2, "obstacles": [[0, 0]],
                          "regions": {"P": [[0, 0]]}})"),
                  SpecError);
}
