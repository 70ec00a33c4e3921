#include "shieldrl/product.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shieldrl/errors.hpp"
#include "shieldrl/shield.hpp"

namespace shieldrl {

int ProductMdp::pid(int s, int q) const {
  if (s < 0 || s >= num_mdp_states || q < 0 || q >= fsa.num_states) return -1;
  return pid_of_[static_cast<std::size_t>(s) * fsa.num_states + q];
}

int ProductMdp::step_pid(int from_pid, int next_s) const {
  int q = states[from_pid].fsa_state;
  int next_q = fsa.step(q, mdp_symbol[next_s]);
  return pid_of_[static_cast<std::size_t>(next_s) * fsa.num_states + next_q];
}

ProductMdp build_product(const Mdp& mdp, const Fsa& fsa) {
  ProductMdp p;
  p.fsa = fsa;
  p.num_mdp_states = mdp.num_states;
  p.num_actions = mdp.num_actions;

  p.mdp_symbol.resize(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    try {
      p.mdp_symbol[s] = fsa.symbol(mdp.labels[s]);
    } catch (const UnknownSymbol& e) {
      throw AlphabetMismatch(std::string("state label not in automaton alphabet: ") +
                             e.what());
    }
  }

  p.pid_of_.assign(static_cast<std::size_t>(mdp.num_states) * fsa.num_states, -1);
  auto intern = [&](int s, int q) {
    int& slot = p.pid_of_[static_cast<std::size_t>(s) * fsa.num_states + q];
    if (slot < 0) {
      slot = static_cast<int>(p.states.size());
      p.states.push_back({s, q});
    }
    return slot;
  };

  // Episodes can start at any physical state, so reachability closes over
  // every episode-entry state, in state order for determinism.
  std::deque<int> queue;
  p.init.resize(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    int q0 = fsa.step(fsa.initial, p.mdp_symbol[s]);
    std::size_t before = p.states.size();
    p.init[s] = intern(s, q0);
    if (p.states.size() > before) queue.push_back(p.init[s]);
  }
  while (!queue.empty()) {
    int pid = queue.front();
    queue.pop_front();
    int s = p.states[pid].mdp_state;
    int q = p.states[pid].fsa_state;
    for (int a = 0; a < mdp.num_actions; ++a)
      for (const auto& o : mdp.transitions[s][a]) {
        if (o.prob <= 0.0) continue;
        int nq = fsa.step(q, p.mdp_symbol[o.next]);
        std::size_t before = p.states.size();
        int np = intern(o.next, nq);
        if (p.states.size() > before) queue.push_back(np);
      }
  }

  int n = p.num_states();
  p.accepting.resize(n);
  p.transitions.resize(n);
  p.reward.resize(n);
  for (int pid = 0; pid < n; ++pid) {
    int s = p.states[pid].mdp_state;
    int q = p.states[pid].fsa_state;
    p.accepting[pid] = fsa.is_accepting(q) ? 1 : 0;
    p.reward[pid] = mdp.reward[s];
    p.transitions[pid].resize(mdp.num_actions);
    for (int a = 0; a < mdp.num_actions; ++a) {
      auto& row = p.transitions[pid][a];
      for (const auto& o : mdp.transitions[s][a]) {
        if (o.prob <= 0.0) continue;
        row.push_back({p.step_pid(pid, o.next), o.prob});
      }
    }
    (void)q;
  }
  return p;
}

TimeProductMdp build_time_product(const ProductMdp& product, int horizon) {
  if (horizon < 1) throw Error("time-product horizon must be at least 1");
  TimeProductMdp tp;
  tp.product = &product;
  tp.horizon = horizon;
  return tp;
}

std::vector<int> epsilon_neighborhood(const ProductMdp& product,
                                      const KnowledgeSets& knowledge, int pid,
                                      double eps) {
  std::vector<int> result;
  int s = product.states[pid].mdp_state;
  for (int a = 0; a < product.num_actions; ++a)
    for (int next_s : knowledge.likely(s, a, eps))
      result.push_back(product.step_pid(pid, next_s));
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<int> distance_to_accepting(const ProductMdp& product,
                                       const KnowledgeSets& knowledge,
                                       double eps) {
  int n = product.num_states();
  // Reverse adjacency of the eps-stochastic edge relation.
  std::vector<std::vector<int>> reverse(n);
  for (int pid = 0; pid < n; ++pid)
    for (int succ : epsilon_neighborhood(product, knowledge, pid, eps))
      reverse[succ].push_back(pid);

  std::vector<int> dist(n, kInfDistance);
  std::deque<int> queue;
  for (int pid = 0; pid < n; ++pid)
    if (product.accepting[pid]) {
      dist[pid] = 0;
      queue.push_back(pid);
    }
  while (!queue.empty()) {
    int pid = queue.front();
    queue.pop_front();
    for (int prev : reverse[pid])
      if (dist[prev] == kInfDistance) {
        dist[prev] = dist[pid] + 1;
        queue.push_back(prev);
      }
  }
  return dist;
}

std::string AssumptionReport::summary() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << ": " << distance_jumps.size()
      << " distance jump(s) greater than one, " << unreachable.size()
      << " state(s) with infinite distance";
  return out.str();
}

AssumptionReport check_assumptions(const ProductMdp& product,
                                   const KnowledgeSets& knowledge, double eps) {
  AssumptionReport report;
  std::vector<int> dist = distance_to_accepting(product, knowledge, eps);
  for (int pid = 0; pid < product.num_states(); ++pid) {
    if (dist[pid] == kInfDistance) {
      report.unreachable.push_back(pid);
      continue;  // jumps from a disconnected state are vacuous
    }
    for (int a = 0; a < product.num_actions; ++a)
      for (const auto& o : product.transitions[pid][a]) {
        int ds = dist[o.next];
        if (ds == kInfDistance ||
            static_cast<long long>(ds) > static_cast<long long>(dist[pid]) + 1)
          report.distance_jumps.push_back({pid, a, o.next});
      }
  }
  (void)eps;
  report.pass = report.distance_jumps.empty() && report.unreachable.empty();
  return report;
}

bool check_initial_condition(const TimeProductMdp& tp, double eps,
                             double pr_des) {
  if (tp.distance.empty())
    throw Error("distances not attached to the time product");
  Rational eps_exact = rational_from_parameter(eps);
  Rational pr_exact = rational_from_parameter(pr_des);
  for (int s = 0; s < tp.product->num_mdp_states; ++s) {
    int d = tp.distance[tp.product->init[s]];
    if (d == kInfDistance || d > tp.horizon) return false;
    if (exact_reach_lower_bound(tp.horizon, d, eps_exact) < pr_exact)
      return false;
  }
  return true;
}

std::string export_product_json(const ProductMdp& product) {
  nlohmann::json j;
  j["num_states"] = product.num_states();
  j["num_actions"] = product.num_actions;
  auto& states = j["states"] = nlohmann::json::array();
  for (int pid = 0; pid < product.num_states(); ++pid) {
    nlohmann::json st;
    st["pid"] = pid;
    st["mdp_state"] = product.states[pid].mdp_state;
    st["fsa_state"] = product.states[pid].fsa_state;
    st["accepting"] = static_cast<bool>(product.accepting[pid]);
    states.push_back(std::move(st));
  }
  auto& edges = j["transitions"] = nlohmann::json::array();
  for (int pid = 0; pid < product.num_states(); ++pid)
    for (int a = 0; a < product.num_actions; ++a)
      for (const auto& o : product.transitions[pid][a]) {
        nlohmann::json e;
        e["from"] = pid;
        e["action"] = a;
        e["to"] = o.next;
        e["prob"] = o.prob;
        edges.push_back(std::move(e));
      }
  return j.dump(2);
}

}  // namespace shieldrl
