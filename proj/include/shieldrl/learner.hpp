#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shieldrl/model.hpp"
#include "shieldrl/product.hpp"
#include "shieldrl/shield.hpp"

namespace shieldrl {

struct TrainConfig {
  int n_episodes = 0;
  double gamma = 0.95;
  double alpha = 0.1;
  bool alpha_inverse_visits = false;  // alpha = 1/(1+visits) schedule
  double explore_rate = 0.1;          // epsilon-greedy rate; not the shield eps
  std::uint64_t seed = 1;
  int start_state = 0;  // physical MDP state of the first episode
  bool record_traces = false;
  bool shield_enabled = true;
  // Replaces the sampled reward with 1 on entering an accepting state and 0
  // elsewhere (learning to satisfy, nothing else).
  bool accept_state_reward = false;
};

// Q-values and visit counts over (product state, t, action). Unvisited
// entries are 0.
class QTable {
 public:
  QTable() = default;
  QTable(int num_states, int horizon, int num_actions)
      : num_states_(num_states),
        horizon_(horizon),
        num_actions_(num_actions),
        q_(static_cast<std::size_t>(num_states) * horizon * num_actions, 0.0),
        visits_(q_.size(), 0) {}

  double value(int pid, int t, int a) const { return q_[index(pid, t, a)]; }
  double& at(int pid, int t, int a) { return q_[index(pid, t, a)]; }
  std::uint32_t visits(int pid, int t, int a) const {
    return visits_[index(pid, t, a)];
  }
  void add_visit(int pid, int t, int a) { ++visits_[index(pid, t, a)]; }

  double max_value(int pid, int t) const {
    double best = value(pid, t, 0);
    for (int a = 1; a < num_actions_; ++a) best = std::max(best, value(pid, t, a));
    return best;
  }

  int num_states() const { return num_states_; }
  int horizon() const { return horizon_; }
  int num_actions() const { return num_actions_; }

  // CSV rows "pid,t,action,value" (visited entries only).
  std::string to_csv() const;

 private:
  std::size_t index(int pid, int t, int a) const {
    return (static_cast<std::size_t>(pid) * horizon_ + t) * num_actions_ + a;
  }
  int num_states_ = 0;
  int horizon_ = 0;
  int num_actions_ = 0;
  std::vector<double> q_;
  std::vector<std::uint32_t> visits_;
};

struct StepTrace {
  int pid;
  int t;
  int action;
  bool shield_engaged;  // action came from the fallback policy
};

struct EpisodeRecord {
  bool satisfied = false;
  int satisfaction_time = -1;  // first entry into an accepting state, or -1
  long long tau = 0;           // satisfaction_time - T when satisfied
  double reward_sum = 0.0;     // undiscounted, as sampled from the model
  int shield_steps = 0;        // steps taken via the fallback policy
  std::vector<StepTrace> trace;    // only when record_traces
  std::vector<unsigned> word;      // output word o(0..T) as symbol masks, ditto
};

struct TrainResult {
  QTable qtable;
  std::vector<int> policy;  // (pid * T + t) -> action
  std::vector<EpisodeRecord> episodes;
  int final_state = 0;  // physical state after the last episode
};

// Episodic Q-learning over the time product. Per step: the fallback policy
// when the permitted set is empty, otherwise epsilon-greedy confined to the
// permitted set; afterwards the one-step Q update with no bootstrapping past
// the terminal layer. Episodes restart at the current physical state with the
// automaton and clock reset. Reproducible: identical seed and config give
// bit-identical records.
TrainResult train(const TimeProductMdp& tp, const ActTable& act,
                  const std::vector<int>& go_action, const Mdp& env,
                  const TrainConfig& config);

// argmax over permitted actions (fallback policy where none), ties toward the
// lowest action id.
std::vector<int> greedy_policy(const QTable& q, const TimeProductMdp& tp,
                               const ActTable& act,
                               const std::vector<int>& go_action);

struct EvalMetrics {
  double success_ratio = 0.0;
  double mean_reward = 0.0;      // undiscounted per-episode sum
  double mean_discounted = 0.0;  // within-episode discounted return
};

// Runs a fixed policy with the shield active.
EvalMetrics evaluate(const std::vector<int>& policy, const TimeProductMdp& tp,
                     const ActTable& act, const std::vector<int>& go_action,
                     const Mdp& env, int episodes, std::uint64_t seed,
                     int start_state, double gamma);

// Plain stationary Q-learning on the bare MDP (no constraint, no shield);
// the reference behavior for reward-only baselines.
struct PlainTrainResult {
  std::vector<double> q;  // s * A + a
  std::vector<double> episode_rewards;
};

PlainTrainResult train_plain(const Mdp& env, int episode_length,
                             const TrainConfig& config);

// Greedy rollout following each argmax action's most likely outcome.
std::vector<int> rollout_greedy_intended(const Mdp& env,
                                         const std::vector<double>& q,
                                         int start_state, int steps);

}  // namespace shieldrl
