#include "shieldrl/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "shieldrl/errors.hpp"

namespace shieldrl {

namespace {

constexpr int kMaxAtoms = 16;

// Intermediate automaton during compilation: deterministic and total on every
// non-accepting state; accepting states ("just completed" markers) carry no
// outgoing edges until the final merge adds the self-loop.
struct Partial {
  int num_symbols = 0;
  int entry = 0;
  std::vector<std::vector<int>> next;  // empty row on accepting states
  std::vector<char> accepting;

  int add_state(bool accept) {
    next.emplace_back(accept ? 0 : num_symbols, -1);
    accepting.push_back(accept ? 1 : 0);
    return static_cast<int>(next.size()) - 1;
  }
};

bool literal_holds(const twtl::Literal& lit, unsigned symbol, int atom_bit) {
  bool present = (symbol >> atom_bit) & 1u;
  return lit.negated ? !present : present;
}

int atom_index(const std::vector<std::string>& atoms, const std::string& atom) {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
  return static_cast<int>(it - atoms.begin());
}

Partial build_hold(const twtl::Node& n, const std::vector<std::string>& atoms,
                   int num_symbols) {
  Partial p;
  p.num_symbols = num_symbols;
  int bit = atom_index(atoms, n.literal.atom);

  // Universal prefix realizing the window start a.
  for (int i = 0; i < n.window_lo; ++i) p.add_state(false);
  int chain_start = static_cast<int>(p.next.size());
  for (int i = 0; i <= n.duration; ++i) p.add_state(false);
  int accept = p.add_state(true);

  for (int i = 0; i < n.window_lo; ++i)
    std::fill(p.next[i].begin(), p.next[i].end(), i + 1);
  for (int i = 0; i <= n.duration; ++i) {
    int q = chain_start + i;
    int advance = (i == n.duration) ? accept : q + 1;
    for (int s = 0; s < num_symbols; ++s)
      p.next[q][s] = literal_holds(n.literal, static_cast<unsigned>(s), bit)
                         ? advance
                         : chain_start;
  }
  p.entry = 0;
  return p;
}

// Drops states unreachable from the entry; keeps discovery (BFS) order.
Partial compact(const Partial& p) {
  std::vector<int> id(p.next.size(), -1);
  std::deque<int> queue;
  std::vector<int> order;
  id[p.entry] = 0;
  order.push_back(p.entry);
  queue.push_back(p.entry);
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    if (p.accepting[q]) continue;
    for (int s = 0; s < p.num_symbols; ++s) {
      int t = p.next[q][s];
      if (id[t] < 0) {
        id[t] = static_cast<int>(order.size());
        order.push_back(t);
        queue.push_back(t);
      }
    }
  }
  Partial out;
  out.num_symbols = p.num_symbols;
  out.entry = 0;
  for (int q : order) {
    int nq = out.add_state(p.accepting[q]);
    if (!p.accepting[q])
      for (int s = 0; s < p.num_symbols; ++s) out.next[nq][s] = id[p.next[q][s]];
  }
  return out;
}

Partial build(const twtl::Node& n, const std::vector<std::string>& atoms,
              int num_symbols);

Partial build_concat(const twtl::Node& n, const std::vector<std::string>& atoms,
                     int num_symbols) {
  Partial a = build(*n.left, atoms, num_symbols);
  Partial b = build(*n.right, atoms, num_symbols);
  int off = static_cast<int>(a.next.size());

  Partial out;
  out.num_symbols = num_symbols;
  out.entry = a.entry;
  // First component: edges into its accepting states are rerouted to the
  // second component's entry, so the symbol after completion is consumed there.
  for (std::size_t q = 0; q < a.next.size(); ++q) {
    out.add_state(false);
    if (a.accepting[q]) continue;  // becomes an unreachable stub
    for (int s = 0; s < num_symbols; ++s) {
      int t = a.next[q][s];
      out.next[q][s] = a.accepting[t] ? b.entry + off : t;
    }
  }
  for (std::size_t q = 0; q < b.next.size(); ++q) {
    int nq = out.add_state(b.accepting[q]);
    if (!b.accepting[q])
      for (int s = 0; s < num_symbols; ++s) out.next[nq][s] = b.next[q][s] + off;
  }
  // The first component's orphaned accept stubs are total-but-dead rows.
  for (std::size_t q = 0; q < a.next.size(); ++q)
    if (a.accepting[q]) std::fill(out.next[q].begin(), out.next[q].end(), static_cast<int>(q));
  return compact(out);
}

Partial build_disjunct(const twtl::Node& n, const std::vector<std::string>& atoms,
                       int num_symbols) {
  Partial a = build(*n.left, atoms, num_symbols);
  Partial b = build(*n.right, atoms, num_symbols);

  Partial out;
  out.num_symbols = num_symbols;
  auto key = [&](int u, int v) {
    return static_cast<long long>(u) * static_cast<long long>(b.next.size()) + v;
  };
  std::unordered_map<long long, int> id;
  std::deque<std::pair<int, int>> queue;

  auto intern = [&](int u, int v) {
    auto [it, fresh] = id.try_emplace(key(u, v), -1);
    if (fresh) {
      it->second = out.add_state(a.accepting[u] || b.accepting[v]);
      queue.emplace_back(u, v);
    }
    return it->second;
  };

  out.entry = intern(a.entry, b.entry);
  while (!queue.empty()) {
    auto [u, v] = queue.front();
    queue.pop_front();
    int q = id[key(u, v)];
    if (out.accepting[q]) continue;
    for (int s = 0; s < num_symbols; ++s)
      out.next[q][s] = intern(a.next[u][s], b.next[v][s]);
  }
  return out;
}

Partial build(const twtl::Node& n, const std::vector<std::string>& atoms,
              int num_symbols) {
  switch (n.kind) {
    case twtl::NodeKind::Hold:
      return build_hold(n, atoms, num_symbols);
    case twtl::NodeKind::Concat:
      return build_concat(n, atoms, num_symbols);
    case twtl::NodeKind::Disjunct:
      return build_disjunct(n, atoms, num_symbols);
  }
  throw Error("unreachable formula kind");
}

std::string symbol_name(const Fsa& fsa, unsigned symbol) {
  std::string name;
  for (std::size_t i = 0; i < fsa.atoms.size(); ++i)
    if ((symbol >> i) & 1u) {
      if (!name.empty()) name += '&';
      name += fsa.atoms[i];
    }
  return name.empty() ? "{}" : name;
}

}  // namespace

unsigned Fsa::symbol(const std::vector<std::string>& labels) const {
  unsigned mask = 0;
  for (const auto& atom : labels) {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
    if (it == atoms.end() || *it != atom)
      throw UnknownSymbol("atom '" + atom + "' was never declared");
    mask |= 1u << (it - atoms.begin());
  }
  return mask;
}

Fsa compile_relaxed(const twtl::Ast& ast) {
  if (!ast) throw SemanticError("cannot compile empty formula");
  Fsa fsa;
  fsa.atoms = twtl::literal_alphabet(ast);
  if (fsa.atoms.size() > kMaxAtoms)
    throw Error("alphabet too large: " + std::to_string(fsa.atoms.size()) +
                " atoms");
  int num_symbols = 1 << static_cast<int>(fsa.atoms.size());

  Partial p = compact(build(*ast, fsa.atoms, num_symbols));

  // Merge the accepting states into a single absorbing accept state; the
  // compacted partial already has BFS ids with the entry at 0.
  int accept = 0;
  for (std::size_t q = 0; q < p.next.size(); ++q)
    if (!p.accepting[q]) ++accept;
  std::vector<int> id(p.next.size());
  for (std::size_t q = 0, n = 0; q < p.next.size(); ++q)
    id[q] = p.accepting[q] ? accept : static_cast<int>(n++);

  fsa.num_states = accept + 1;
  fsa.initial = id[p.entry];
  fsa.accept = accept;
  fsa.delta.assign(static_cast<std::size_t>(fsa.num_states) * num_symbols, accept);
  for (std::size_t q = 0; q < p.next.size(); ++q) {
    if (p.accepting[q]) continue;
    for (int s = 0; s < num_symbols; ++s)
      fsa.delta[static_cast<std::size_t>(id[q]) * num_symbols + s] =
          id[p.next[q][s]];
  }
  return fsa;
}

RunResult run(const Fsa& fsa, const std::vector<std::vector<std::string>>& word) {
  RunResult result;
  int q = fsa.initial;
  result.trajectory.reserve(word.size() + 1);
  result.trajectory.push_back(q);
  for (const auto& labels : word) {
    q = fsa.step(q, fsa.symbol(labels));
    result.trajectory.push_back(q);
  }
  result.accepted = fsa.is_accepting(q);
  return result;
}

std::string export_dot(const Fsa& fsa) {
  std::ostringstream out;
  out << "digraph fsa {\n  rankdir=LR;\n";
  for (int q = 0; q < fsa.num_states; ++q) {
    out << "  q" << q << " [shape="
        << (fsa.is_accepting(q) ? "doublecircle" : "circle");
    if (q == fsa.initial) out << ", penwidth=2";
    out << "];\n";
  }
  for (int q = 0; q < fsa.num_states; ++q) {
    std::map<int, std::vector<unsigned>> grouped;
    for (int s = 0; s < fsa.num_symbols(); ++s)
      grouped[fsa.step(q, static_cast<unsigned>(s))].push_back(
          static_cast<unsigned>(s));
    for (const auto& [to, symbols] : grouped) {
      out << "  q" << q << " -> q" << to << " [label=\"";
      if (static_cast<int>(symbols.size()) == fsa.num_symbols()) {
        out << "*";
      } else {
        for (std::size_t i = 0; i < symbols.size(); ++i) {
          if (i) out << ',';
          out << symbol_name(fsa, symbols[i]);
        }
      }
      out << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const Fsa& fsa) {
  nlohmann::json j;
  j["atoms"] = fsa.atoms;
  j["initial"] = fsa.initial;
  j["accept"] = fsa.accept;
  j["num_states"] = fsa.num_states;
  auto& transitions = j["transitions"] = nlohmann::json::array();
  for (int q = 0; q < fsa.num_states; ++q)
    for (int s = 0; s < fsa.num_symbols(); ++s) {
      nlohmann::json entry;
      entry["from"] = q;
      auto& atoms = entry["symbol"] = nlohmann::json::array();
      for (std::size_t i = 0; i < fsa.atoms.size(); ++i)
        if ((static_cast<unsigned>(s) >> i) & 1u) atoms.push_back(fsa.atoms[i]);
      entry["to"] = fsa.step(q, static_cast<unsigned>(s));
      transitions.push_back(std::move(entry));
    }
  return j.dump(2);
}

}  // namespace shieldrl
