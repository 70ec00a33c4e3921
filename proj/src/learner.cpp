#include "shieldrl/learner.hpp"

#include <algorithm>
#include <sstream>

#include "shieldrl/errors.hpp"

namespace shieldrl {

namespace {

int nth_set_bit(std::uint32_t mask, int n) {
  for (int bit = 0;; ++bit)
    if ((mask >> bit) & 1u) {
      if (n-- == 0) return bit;
    }
}

int argmax_in_mask(const QTable& q, int pid, int t, std::uint32_t mask) {
  int best = -1;
  double best_value = 0.0;
  for (int a = 0; a < q.num_actions(); ++a) {
    if (!((mask >> a) & 1u)) continue;
    double v = q.value(pid, t, a);
    if (best < 0 || v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

// Exploitation step: argmax over the permitted set with ties broken
// uniformly. Untrained states are full ties, so early exploitation walks
// randomly instead of pinning to one compass direction.
int exploit_in_mask(const QTable& q, int pid, int t, std::uint32_t mask,
                    RngStream& rng) {
  int best = argmax_in_mask(q, pid, t, mask);
  double best_value = q.value(pid, t, best);
  int ties = 0;
  for (int a = 0; a < q.num_actions(); ++a)
    if (((mask >> a) & 1u) && q.value(pid, t, a) == best_value) ++ties;
  if (ties <= 1) return best;
  int pick = rng.next_index(ties);
  for (int a = 0; a < q.num_actions(); ++a)
    if (((mask >> a) & 1u) && q.value(pid, t, a) == best_value && pick-- == 0)
      return a;
  return best;
}

}  // namespace

std::string QTable::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "pid,t,action,value\n";
  for (int pid = 0; pid < num_states_; ++pid)
    for (int t = 0; t < horizon_; ++t)
      for (int a = 0; a < num_actions_; ++a)
        if (visits(pid, t, a) > 0)
          out << pid << ',' << t << ',' << a << ',' << value(pid, t, a) << '\n';
  return out.str();
}

TrainResult train(const TimeProductMdp& tp, const ActTable& act,
                  const std::vector<int>& go_action, const Mdp& env,
                  const TrainConfig& config) {
  const ProductMdp& product = *tp.product;
  const int T = tp.horizon;
  const std::uint32_t all_actions = (1u << product.num_actions) - 1;

  TrainResult result;
  result.qtable = QTable(product.num_states(), T, product.num_actions);
  result.episodes.reserve(config.n_episodes);
  QTable& q = result.qtable;

  RngStream rng(config.seed);
  int s = config.start_state;

  for (int episode = 0; episode < config.n_episodes; ++episode) {
    int pid = product.init[s];
    EpisodeRecord record;
    if (config.record_traces) record.word.push_back(product.mdp_symbol[s]);
    if (product.accepting[pid]) {
      record.satisfied = true;
      record.satisfaction_time = 0;
    }

    for (int t = 0; t < T; ++t) {
      std::uint32_t mask =
          config.shield_enabled ? act.mask(pid, T - t) : all_actions;
      int a;
      bool engaged = false;
      if (mask == 0) {
        a = go_action[pid];
        engaged = true;
        if (a < 0)
          throw ShieldViolation("fallback policy undefined at state " +
                                std::to_string(pid));
      } else if (rng.next_double() < config.explore_rate) {
        a = nth_set_bit(mask, rng.next_index(__builtin_popcount(mask)));
      } else {
        a = exploit_in_mask(q, pid, t, mask, rng);
      }
      if (!engaged && !((mask >> a) & 1u))
        throw ShieldViolation("selected action escaped the permitted set");

      auto [next_s, r] = sample_transition(env, s, a, rng);
      int next_pid = product.step_pid(pid, next_s);
      if (config.accept_state_reward)
        r = product.accepting[next_pid] ? 1.0 : 0.0;
      record.reward_sum += r;
      if (engaged) ++record.shield_steps;
      if (config.record_traces) {
        record.trace.push_back({pid, t, a, engaged});
        record.word.push_back(product.mdp_symbol[next_s]);
      }

      double bootstrap = t + 1 < T ? q.max_value(next_pid, t + 1) : 0.0;
      double alpha = config.alpha_inverse_visits
                         ? 1.0 / (1.0 + q.visits(pid, t, a))
                         : config.alpha;
      double& qv = q.at(pid, t, a);
      qv = (1.0 - alpha) * qv + alpha * (r + config.gamma * bootstrap);
      q.add_visit(pid, t, a);

      if (!record.satisfied && product.accepting[next_pid]) {
        record.satisfied = true;
        record.satisfaction_time = t + 1;
      }
      s = next_s;
      pid = next_pid;
    }

    if (record.satisfied) record.tau = record.satisfaction_time - T;
    result.episodes.push_back(std::move(record));
    // Next episode restarts here: automaton and clock reset at the current
    // physical state via product.init[s] at the loop head.
  }

  result.final_state = s;
  result.policy = greedy_policy(q, tp, act, go_action);
  return result;
}

std::vector<int> greedy_policy(const QTable& q, const TimeProductMdp& tp,
                               const ActTable& act,
                               const std::vector<int>& go_action) {
  const ProductMdp& product = *tp.product;
  const int T = tp.horizon;
  std::vector<int> policy(static_cast<std::size_t>(product.num_states()) * T);
  for (int pid = 0; pid < product.num_states(); ++pid)
    for (int t = 0; t < T; ++t) {
      std::uint32_t mask = act.mask(pid, T - t);
      policy[static_cast<std::size_t>(pid) * T + t] =
          mask == 0 ? go_action[pid] : argmax_in_mask(q, pid, t, mask);
    }
  return policy;
}

EvalMetrics evaluate(const std::vector<int>& policy, const TimeProductMdp& tp,
                     const ActTable& act, const std::vector<int>& go_action,
                     const Mdp& env, int episodes, std::uint64_t seed,
                     int start_state, double gamma) {
  const ProductMdp& product = *tp.product;
  const int T = tp.horizon;
  RngStream rng(seed);
  EvalMetrics metrics;
  int s = start_state;
  for (int episode = 0; episode < episodes; ++episode) {
    int pid = product.init[s];
    bool satisfied = product.accepting[pid] != 0;
    double reward_sum = 0.0;
    double discounted = 0.0;
    double discount = 1.0;
    for (int t = 0; t < T; ++t) {
      std::uint32_t mask = act.mask(pid, T - t);
      int a = mask == 0 ? go_action[pid]
                        : policy[static_cast<std::size_t>(pid) * T + t];
      if (mask != 0 && !((mask >> a) & 1u))
        throw ShieldViolation("policy action escapes the permitted set");
      auto [next_s, r] = sample_transition(env, s, a, rng);
      int next_pid = product.step_pid(pid, next_s);
      reward_sum += r;
      discounted += discount * r;
      discount *= gamma;
      satisfied = satisfied || product.accepting[next_pid];
      s = next_s;
      pid = next_pid;
    }
    metrics.success_ratio += satisfied ? 1.0 : 0.0;
    metrics.mean_reward += reward_sum;
    metrics.mean_discounted += discounted;
  }
  if (episodes > 0) {
    metrics.success_ratio /= episodes;
    metrics.mean_reward /= episodes;
    metrics.mean_discounted /= episodes;
  }
  return metrics;
}

PlainTrainResult train_plain(const Mdp& env, int episode_length,
                             const TrainConfig& config) {
  PlainTrainResult result;
  result.q.assign(static_cast<std::size_t>(env.num_states) * env.num_actions,
                  0.0);
  RngStream rng(config.seed);
  int s = config.start_state;
  auto q_at = [&](int state, int a) -> double& {
    return result.q[static_cast<std::size_t>(state) * env.num_actions + a];
  };
  for (int episode = 0; episode < config.n_episodes; ++episode) {
    double reward_sum = 0.0;
    for (int t = 0; t < episode_length; ++t) {
      int a;
      if (rng.next_double() < config.explore_rate) {
        a = rng.next_index(env.num_actions);
      } else {
        a = 0;
        for (int cand = 1; cand < env.num_actions; ++cand)
          if (q_at(s, cand) > q_at(s, a)) a = cand;
        int ties = 0;
        for (int cand = 0; cand < env.num_actions; ++cand)
          if (q_at(s, cand) == q_at(s, a)) ++ties;
        if (ties > 1) {
          int pick = rng.next_index(ties);
          for (int cand = 0; cand < env.num_actions; ++cand)
            if (q_at(s, cand) == q_at(s, a) && pick-- == 0) {
              a = cand;
              break;
            }
        }
      }
      auto [next_s, r] = sample_transition(env, s, a, rng);
      reward_sum += r;
      double best_next = q_at(next_s, 0);
      for (int cand = 1; cand < env.num_actions; ++cand)
        best_next = std::max(best_next, q_at(next_s, cand));
      double& qv = q_at(s, a);
      qv = (1.0 - config.alpha) * qv +
           config.alpha * (r + config.gamma * best_next);
      s = next_s;
    }
    result.episode_rewards.push_back(reward_sum);
  }
  return result;
}

std::vector<int> rollout_greedy_intended(const Mdp& env,
                                         const std::vector<double>& q,
                                         int start_state, int steps) {
  std::vector<int> trajectory{start_state};
  int s = start_state;
  for (int t = 0; t < steps; ++t) {
    int a = 0;
    for (int cand = 1; cand < env.num_actions; ++cand)
      if (q[static_cast<std::size_t>(s) * env.num_actions + cand] >
          q[static_cast<std::size_t>(s) * env.num_actions + a])
        a = cand;
    const auto& row = env.outcomes(s, a);
    int next = row.front().next;
    double best_p = 0.0;
    for (const auto& o : row)
      if (o.prob > best_p) {
        best_p = o.prob;
        next = o.next;
      }
    s = next;
    trajectory.push_back(s);
  }
  return trajectory;
}

}  // namespace shieldrl
