#pragma once

#include <string>
#include <vector>

#include "shieldrl/rng.hpp"
#include "shieldrl/twtl.hpp"

namespace shieldrl::testing {

// Brute-force relaxed satisfaction: true iff some prefix of the word completes
// the formula. Completion positions are enumerated recursively over the
// syntax tree (exists-split for concatenation), with no recourse to the
// automaton construction this oracle checks.
bool semantic_accepts(const twtl::Ast& ast,
                      const std::vector<std::vector<std::string>>& word);

// Random well-formed formula over the atoms {A, B, C}; depth-bounded.
twtl::Ast random_formula(RngStream& rng, int max_depth);

// Random word of label sets over the given atoms.
std::vector<std::vector<std::string>> random_word(
    RngStream& rng, const std::vector<std::string>& atoms, int length);

}  // namespace shieldrl::testing
