#include "shieldrl/shield.hpp"

#include <map>
#include <sstream>

#include "shieldrl/errors.hpp"

namespace shieldrl {

ActTable::ActTable(int num_states, int horizon, int num_actions)
    : num_states_(num_states), horizon_(horizon), num_actions_(num_actions) {
  std::uint32_t all = (1u << num_actions) - 1;
  table_.assign(static_cast<std::size_t>(num_states) * horizon, all);
}

std::string ActTable::to_csv() const {
  std::ostringstream out;
  out << "pid,k,permitted_mask\n";
  for (int pid = 0; pid < num_states_; ++pid)
    for (int k = 1; k <= horizon_; ++k)
      out << pid << ',' << k << ',' << mask(pid, k) << '\n';
  return out.str();
}

Rational exact_reach_lower_bound(long long k, long long d, const Rational& eps) {
  if (eps < 0 || eps >= 1) throw DomainError("eps must lie in [0,1)");
  if (k < 0 || d < 0) throw DomainError("steps and distance must be non-negative");
  if (d == kInfDistance || d > k) return Rational(0);

  long long i_max = (k - d) / 2;
  Rational one_minus = Rational(1) - eps;
  // term_i = C(k,i) eps^i (1-eps)^(k-i), built by recurrence from term_0.
  Rational term = 1;
  for (long long j = 0; j < k; ++j) term *= one_minus;
  Rational sum = term;
  for (long long i = 0; i < i_max; ++i) {
    term *= eps;
    term /= one_minus;
    term *= Rational(k - i, i + 1);
    sum += term;
  }
  return sum;
}

double reach_lower_bound(long long k, int d, double eps) {
  return to_double(exact_reach_lower_bound(k, d, rational_from_parameter(eps)));
}

ActTable prune_actions(const TimeProductMdp& tp, const KnowledgeSets& knowledge,
                       const ShieldConfig& config) {
  const ProductMdp& product = *tp.product;
  if (tp.distance.empty())
    throw Error("distances not attached to the time product");
  if (config.horizon != tp.horizon)
    throw Error("shield config horizon differs from the time product horizon");

  Rational eps = rational_from_parameter(config.eps);
  Rational pr_des = rational_from_parameter(config.pr_des);

  // The worst successor distance of (pid, a) does not depend on the clock.
  int n = product.num_states();
  std::vector<long long> worst(static_cast<std::size_t>(n) * product.num_actions, 0);
  for (int pid = 0; pid < n; ++pid) {
    if (product.accepting[pid]) continue;
    int s = product.states[pid].mdp_state;
    for (int a = 0; a < product.num_actions; ++a) {
      long long d_max = -1;  // no feasible successor: nothing reachable at all
      for (int next_s : knowledge.feasible(s, a)) {
        int d = tp.distance[product.step_pid(pid, next_s)];
        d_max = std::max(d_max, static_cast<long long>(d));
      }
      worst[static_cast<std::size_t>(pid) * product.num_actions + a] =
          d_max < 0 ? kInfDistance : d_max;
    }
  }

  // keep(k, d_max): bound over the remaining k-1 steps stays at pr_des.
  std::map<std::pair<int, long long>, bool> memo;
  auto keep = [&](int k, long long d_max) {
    if (d_max > static_cast<long long>(k) - 1) return false;  // i_max < 0
    auto [it, fresh] = memo.try_emplace({k, d_max}, false);
    if (fresh)
      it->second = exact_reach_lower_bound(k - 1, d_max, eps) >= pr_des;
    return it->second;
  };

  ActTable act(n, tp.horizon, product.num_actions);
  for (int pid = 0; pid < n; ++pid) {
    if (product.accepting[pid]) continue;
    for (int k = 1; k <= tp.horizon; ++k) {
      std::uint32_t mask = 0;
      for (int a = 0; a < product.num_actions; ++a)
        if (keep(k, worst[static_cast<std::size_t>(pid) * product.num_actions + a]))
          mask |= 1u << a;
      act.set_mask(pid, k, mask);
    }
  }
  return act;
}

int go_policy_score(const ProductMdp& product, const KnowledgeSets& knowledge,
                    const std::vector<int>& distance, int pid, int action,
                    double eps) {
  int s = product.states[pid].mdp_state;
  int best = kInfDistance;
  for (int next_s : knowledge.likely(s, action, eps))
    best = std::min(best, distance[product.step_pid(pid, next_s)]);
  return best;
}

namespace {

int go_policy_from_distance(const ProductMdp& product,
                            const KnowledgeSets& knowledge,
                            const std::vector<int>& distance, int pid,
                            double eps) {
  int best_action = -1;
  int best = kInfDistance;
  for (int a = 0; a < product.num_actions; ++a) {
    int score = go_policy_score(product, knowledge, distance, pid, a, eps);
    if (score < best) {
      best = score;
      best_action = a;
    }
  }
  return best == kInfDistance ? -1 : best_action;
}

}  // namespace

int go_policy(const ProductMdp& product, const KnowledgeSets& knowledge,
              int pid, double eps) {
  std::vector<int> distance = distance_to_accepting(product, knowledge, eps);
  int action = go_policy_from_distance(product, knowledge, distance, pid, eps);
  if (action < 0)
    throw NoViablePath("state " + std::to_string(pid) +
                       " has no eps-likely path toward acceptance");
  return action;
}

std::vector<int> go_policy_table(const ProductMdp& product,
                                 const KnowledgeSets& knowledge, double eps) {
  std::vector<int> distance = distance_to_accepting(product, knowledge, eps);
  std::vector<int> table(product.num_states());
  for (int pid = 0; pid < product.num_states(); ++pid)
    table[pid] = go_policy_from_distance(product, knowledge, distance, pid, eps);
  return table;
}

}  // namespace shieldrl
