#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shieldrl/exact.hpp"
#include "shieldrl/product.hpp"

namespace shieldrl {

struct ShieldConfig {
  double eps = 0.0;     // assumed action uncertainty (may overestimate reality)
  double pr_des = 0.0;  // desired per-episode satisfaction probability
  int horizon = 0;      // episode length T
};

// Permitted actions per (product state, remaining time k), k in 1..T. Indexed
// by k rather than by time-product state id, which is equivalent and T times
// smaller. Accepting states are never pruned.
class ActTable {
 public:
  ActTable() = default;
  ActTable(int num_states, int horizon, int num_actions);

  std::uint32_t mask(int pid, int k) const {
    return table_[static_cast<std::size_t>(pid) * horizon_ + (k - 1)];
  }
  bool permits(int pid, int k, int action) const {
    return (mask(pid, k) >> action) & 1u;
  }
  bool empty(int pid, int k) const { return mask(pid, k) == 0; }
  int count(int pid, int k) const { return __builtin_popcount(mask(pid, k)); }

  int horizon() const { return horizon_; }
  int num_actions() const { return num_actions_; }

  void set_mask(int pid, int k, std::uint32_t m) {
    table_[static_cast<std::size_t>(pid) * horizon_ + (k - 1)] = m;
  }

  // CSV rows "pid,k,bitmask" for inspection.
  std::string to_csv() const;

 private:
  int num_states_ = 0;
  int horizon_ = 0;
  int num_actions_ = 0;
  std::vector<std::uint32_t> table_;
};

// Lower bound on the probability of reaching the accepting set within k steps
// from distance d at uncertainty eps:
//
//   sum_{i=0}^{floor((k-d)/2)} C(k,i) eps^i (1-eps)^(k-i)
//
// Returns 0 when k < d or d is infinite (those cases are "prune" decisions,
// and a total function keeps the initial-condition check simple). Computed
// over exact rationals; 0^0 = 1 so eps = 0 yields 1. Throws DomainError for
// eps outside [0,1).
Rational exact_reach_lower_bound(long long k, long long d, const Rational& eps);
double reach_lower_bound(long long k, int d, double eps);

// Offline pruning pass: an action survives at (pid, k) iff even its
// worst-distance feasible successor leaves a reach bound of at least pr_des
// over the remaining k-1 steps. Feasibility comes from the knowledge
// interface, distances from the attached eps-level table.
ActTable prune_actions(const TimeProductMdp& tp, const KnowledgeSets& knowledge,
                       const ShieldConfig& config);

// Stationary fallback policy: the action minimizing the smallest distance
// among eps-likely successors; ties break toward the lowest action id, and an
// action with no eps-likely successor scores infinite. Throws NoViablePath
// when every action scores infinite.
int go_policy(const ProductMdp& product, const KnowledgeSets& knowledge,
              int pid, double eps);

// go_policy for every state at once; -1 marks states where no action has an
// eps-likely successor (querying those via go_policy throws).
std::vector<int> go_policy_table(const ProductMdp& product,
                                 const KnowledgeSets& knowledge, double eps);

// Smallest distance among the eps-likely successors of (pid, action);
// kInfDistance when there are none. Exposed for tests and the policy oracle.
int go_policy_score(const ProductMdp& product, const KnowledgeSets& knowledge,
                    const std::vector<int>& distance, int pid, int action,
                    double eps);

}  // namespace shieldrl
