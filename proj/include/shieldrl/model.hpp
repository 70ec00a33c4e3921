#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shieldrl/rng.hpp"

namespace shieldrl {

// One probabilistic outcome of a state-action pair.
struct Outcome {
  int next = 0;
  double prob = 0.0;
};

// Finite MDP with a labeling function over atomic propositions. The reward
// table is part of the model but is revealed to the learner only through
// sampling. Immutable after construction.
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<std::vector<Outcome>>> transitions;  // [s][a]
  std::vector<std::vector<double>> reward;                     // [s][a]
  std::vector<std::string> atoms;                              // sorted
  std::vector<std::vector<std::string>> labels;                // [s], sorted

  const std::vector<Outcome>& outcomes(int s, int a) const;
};

// Assumption-style prior knowledge: which transitions are feasible and which
// are sufficiently likely, without the actual probabilities. Likelihood
// membership is the only probability information exposed.
class KnowledgeSets {
 public:
  KnowledgeSets() = default;
  explicit KnowledgeSets(const Mdp& mdp);

  // States s' with positive transition probability from (s, a).
  const std::vector<int>& feasible(int s, int a) const;

  // States s'' with transition probability >= 1 - eps from (s, a).
  std::vector<int> likely(int s, int a, double eps) const;

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<std::vector<int>> feasible_;        // [s * A + a]
  std::vector<std::vector<Outcome>> outcomes_;    // membership queries only
};

// Grid scenario: an agent moving over a width x height board with 8-connected
// moves plus Stay, labeled regions, per-cell monitoring rewards, and obstacle
// cells that are removed from the state space.
struct GridSpec {
  int width = 0;
  int height = 0;
  double p_intended = 0.9;
  std::vector<std::pair<int, int>> obstacles;
  std::map<std::string, std::vector<std::pair<int, int>>> regions;
  std::vector<std::pair<std::pair<int, int>, double>> rewards;

  static GridSpec from_json(const std::string& text);
  std::string to_json() const;
  void validate() const;  // throws SpecError
};

// Action ids in fixed compass order; Stay is the last action.
enum GridAction : int { N = 0, NE, E, SE, S, SW, W, NW, Stay };
inline constexpr int kGridActions = 9;
inline constexpr std::array<std::pair<int, int>, kGridActions> kGridMoves = {
    {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 0}}};
extern const std::array<const char*, kGridActions> kGridActionNames;

struct GridModel {
  Mdp mdp;
  KnowledgeSets knowledge;
  std::vector<std::pair<int, int>> cell_of_state;  // dense id -> (x, y)
  std::vector<int> state_of_cell;                  // y * width + x -> id or -1
  int width = 0;
  int height = 0;

  int state_at(int x, int y) const;  // throws SpecError on obstacle/out of range
};

// Builds the grid MDP. Every state has all 9 actions; the intended move gets
// p_intended and the remainder is split uniformly over the other feasible
// moves (Stay included). An infeasible intended move spreads the full mass
// uniformly over all feasible moves.
GridModel build_grid(const GridSpec& spec);

// Draws a successor and reveals the reward R(s, a). Reproducible for a fixed
// rng stream. Throws NoSuchAction when (s, a) has no outcomes.
std::pair<int, double> sample_transition(const Mdp& mdp, int s, int a,
                                         RngStream& rng);

}  // namespace shieldrl
