#include "support/semantics_oracle.hpp"

#include <algorithm>
#include <set>

namespace shieldrl::testing {

namespace {

bool literal_at(const twtl::Literal& lit,
                const std::vector<std::vector<std::string>>& word, int i) {
  bool present = std::find(word[i].begin(), word[i].end(), lit.atom) !=
                 word[i].end();
  return lit.negated ? !present : present;
}

// Positions e such that the formula, started at offset `start`, completes
// exactly after consuming word[start..e].
std::set<int> completions(const twtl::Node& n,
                          const std::vector<std::vector<std::string>>& word,
                          int start) {
  std::set<int> result;
  switch (n.kind) {
    case twtl::NodeKind::Hold: {
      for (int t = start + n.window_lo;
           t + n.duration < static_cast<int>(word.size()); ++t) {
        bool all = true;
        for (int i = 0; i <= n.duration && all; ++i)
          all = literal_at(n.literal, word, t + i);
        if (all) result.insert(t + n.duration);
      }
      return result;
    }
    case twtl::NodeKind::Concat: {
      for (int mid : completions(*n.left, word, start))
        for (int e : completions(*n.right, word, mid + 1)) result.insert(e);
      return result;
    }
    case twtl::NodeKind::Disjunct: {
      result = completions(*n.left, word, start);
      for (int e : completions(*n.right, word, start)) result.insert(e);
      return result;
    }
  }
  return result;
}

}  // namespace

bool semantic_accepts(const twtl::Ast& ast,
                      const std::vector<std::vector<std::string>>& word) {
  return !completions(*ast, word, 0).empty();
}

twtl::Ast random_formula(RngStream& rng, int max_depth) {
  static const std::vector<std::string> atoms = {"A", "B", "C"};
  int kind = max_depth <= 0 ? 0 : rng.next_index(4);
  if (kind <= 1) {
    twtl::Literal lit;
    lit.atom = atoms[rng.next_index(static_cast<int>(atoms.size()))];
    lit.negated = rng.next_index(5) == 0;
    int d = rng.next_index(3);
    int a = rng.next_index(3);
    int b = a + d + rng.next_index(4);
    return twtl::hold(d, lit, a, b);
  }
  twtl::Ast left = random_formula(rng, max_depth - 1);
  twtl::Ast right = random_formula(rng, max_depth - 1);
  return kind == 2 ? twtl::concat(left, right) : twtl::disjunct(left, right);
}

std::vector<std::vector<std::string>> random_word(
    RngStream& rng, const std::vector<std::string>& atoms, int length) {
  std::vector<std::vector<std::string>> word(length);
  for (auto& labels : word)
    for (const auto& atom : atoms)
      if (rng.next_index(5) < 2) labels.push_back(atom);
  return word;
}

}  // namespace shieldrl::testing
