#pragma once

#include <limits>
#include <string>
#include <vector>

#include "shieldrl/automaton.hpp"
#include "shieldrl/model.hpp"

namespace shieldrl {

// Sentinel for "no path over eps-stochastic transitions"; compares larger
// than every finite distance. Never add to it without checking first.
inline constexpr int kInfDistance = std::numeric_limits<int>::max();

struct ProductState {
  int mdp_state = 0;
  int fsa_state = 0;
};

// Synchronous composition of the MDP with the automaton, restricted to the
// reachable part. The automaton consumes the initial state's label on episode
// entry and thereafter the destination label of every transition, so an
// episode of T actions consumes all T+1 word symbols exactly once.
// Immutable after build.
struct ProductMdp {
  Fsa fsa;
  int num_mdp_states = 0;
  int num_actions = 0;
  std::vector<unsigned> mdp_symbol;   // mdp state -> alphabet bitmask
  std::vector<ProductState> states;   // pid -> (s, q)
  std::vector<int> init;              // mdp state -> episode-entry pid
  std::vector<char> accepting;        // pid -> automaton component accepting
  std::vector<std::vector<std::vector<Outcome>>> transitions;  // [pid][a]
  std::vector<std::vector<double>> reward;                     // [pid][a]

  int num_states() const { return static_cast<int>(states.size()); }

  // pid of (s, q), or -1 when unreachable.
  int pid(int s, int q) const;

  // Successor pid after moving to mdp state next_s (automaton steps on the
  // destination label).
  int step_pid(int from_pid, int next_s) const;

 private:
  friend ProductMdp build_product(const Mdp&, const Fsa&);
  std::vector<int> pid_of_;  // s * |Q| + q -> pid or -1
};

// Builds the reachable product from the episode-entry states
// {(s, delta(q_init, l(s))) : s in S}. Throws AlphabetMismatch when a state
// label uses an atom the automaton does not declare.
ProductMdp build_product(const Mdp& mdp, const Fsa& fsa);

// Product MDP layered by the episode clock t in {0..T-1} plus a terminal
// layer. Never materialized densely: per-state distance plus the remaining
// time k = T - t recover everything the shield and learner need.
struct TimeProductMdp {
  const ProductMdp* product = nullptr;
  int horizon = 0;            // T
  double eps = 0.0;           // uncertainty level the distances correspond to
  std::vector<int> distance;  // pid -> d (layer-invariant); kInfDistance if none

  // Dense state count of the action layers (reported size).
  long long size() const {
    return static_cast<long long>(product->num_states()) * horizon;
  }

  // Distance of the time-product state (pid, t): d when the remaining time
  // still admits it, otherwise infinite.
  int lifted_distance(int pid, int t) const {
    int d = distance[pid];
    if (d == kInfDistance) return kInfDistance;
    return static_cast<long long>(t) + d <= horizon ? d : kInfDistance;
  }
};

TimeProductMdp build_time_product(const ProductMdp& product, int horizon);

// One-step eps-stochastic neighborhood of pid: successors reachable via some
// action with probability at least 1-eps, taken from the knowledge interface
// rather than the exact probabilities. Sorted.
std::vector<int> epsilon_neighborhood(const ProductMdp& product,
                                      const KnowledgeSets& knowledge, int pid,
                                      double eps);

// Distance of every product state to the accepting set over eps-stochastic
// transitions (backward BFS); kInfDistance when disconnected.
std::vector<int> distance_to_accepting(const ProductMdp& product,
                                       const KnowledgeSets& knowledge,
                                       double eps);

struct AssumptionReport {
  // Feasible transitions (pid, action, successor pid) whose distance grows by
  // more than one.
  struct Jump {
    int pid;
    int action;
    int succ;
  };
  std::vector<Jump> distance_jumps;
  std::vector<int> unreachable;  // pids with infinite distance
  bool pass = false;
  std::string summary() const;
};

// Validates the distance-growth assumption and the finite-distance premise.
AssumptionReport check_assumptions(const ProductMdp& product,
                                   const KnowledgeSets& knowledge, double eps);

// True iff every episode-entry state satisfies the horizon-T reachability
// bound at level pr_des (exact arithmetic; distances must be attached).
bool check_initial_condition(const TimeProductMdp& tp, double eps,
                             double pr_des);

// Debug dump of the product graph.
std::string export_product_json(const ProductMdp& product);

}  // namespace shieldrl
