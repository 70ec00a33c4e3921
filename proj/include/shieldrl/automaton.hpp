#pragma once

#include <string>
#include <vector>

#include "shieldrl/twtl.hpp"

namespace shieldrl {

// Deterministic, total finite-state automaton over label-set symbols.
//
// A symbol is a bitmask over `atoms` (bit i set <=> atoms[i] observed), so the
// alphabet is the full power set of the declared atoms and the transition
// table is total by construction. Compilation leaves exactly one accepting
// state, and it carries a self-loop on every symbol, so acceptance is
// absorbing. Immutable after compile; shareable across threads.
struct Fsa {
  std::vector<std::string> atoms;  // sorted lexicographically
  int num_states = 0;
  int initial = 0;
  int accept = -1;
  std::vector<int> delta;  // [q * num_symbols() + symbol] -> successor

  int num_symbols() const { return 1 << static_cast<int>(atoms.size()); }

  int step(int q, unsigned symbol) const {
    return delta[static_cast<std::size_t>(q) * num_symbols() + symbol];
  }

  bool is_accepting(int q) const { return q == accept; }

  // Bitmask for a label set. Throws UnknownSymbol on an undeclared atom.
  unsigned symbol(const std::vector<std::string>& labels) const;
};

// Compiles the temporally-relaxed automaton of a formula. Window deadlines are
// dropped entirely (they are enforced downstream by the episode clock), so the
// result is independent of every window's b:
//
//   hold [H^d lit]^[a,b]  ->  a-step universal prefix chain, then a (d+1)-step
//                             counter chain over lit whose !lit edges reset to
//                             the chain start (the retry edges)
//   f1 . f2               ->  f1's accepting states spliced onto f2's entry,
//                             so the next symbol is consumed by f2
//   f1 | f2               ->  synchronized product with union acceptance,
//                             unreachable states removed
//
// Finally all accepting states are merged into one, which is given a
// universal self-loop.
Fsa compile_relaxed(const twtl::Ast& ast);

struct RunResult {
  std::vector<int> trajectory;  // length |word| + 1, starts at initial
  bool accepted = false;        // final state is the accepting state
};

// Feeds a word of label sets through the automaton.
RunResult run(const Fsa& fsa, const std::vector<std::vector<std::string>>& word);

// Graph-description text (DOT); accepting state double-circled, deterministic
// ordering, byte-identical across calls on the same automaton.
std::string export_dot(const Fsa& fsa);

// Transition table as JSON triples {from, symbol, to}.
std::string export_json(const Fsa& fsa);

}  // namespace shieldrl
