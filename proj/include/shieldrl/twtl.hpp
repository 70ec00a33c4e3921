#pragma once

#include <memory>
#include <string>
#include <vector>

namespace shieldrl::twtl {

// An atomic proposition or its negation.
struct Literal {
  std::string atom;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

enum class NodeKind { Hold, Concat, Disjunct };

struct Node;
using Ast = std::shared_ptr<const Node>;

// Immutable syntax tree of the bounded temporal-logic fragment:
//
//   hold      [H^d lit]^[a,b]  lit observed d+1 consecutive steps, the first
//                              no earlier than a, the last no later than b
//   concat    f1 . f2          f2 starts on the step after f1 completes
//   disjunct  f1 | f2          either branch satisfies
struct Node {
  NodeKind kind;

  // Hold payload.
  int duration = 0;  // d
  Literal literal;
  int window_lo = 0;  // a
  int window_hi = 0;  // b

  // Concat / Disjunct children.
  Ast left, right;
};

// Constructors validate shape: hold throws SemanticError when a > b or
// d > b - a (the window cannot contain a d-hold) or any field is negative.
Ast hold(int duration, Literal literal, int window_lo, int window_hi);
Ast concat(Ast left, Ast right);
Ast disjunct(Ast left, Ast right);

bool equal(const Ast& a, const Ast& b);

// Recursive-descent parser for the concrete grammar (whitespace insignificant):
//
//   formula := term ('.' term)*
//   term    := factor ('|' factor)*
//   factor  := '[' 'H' '^' INT literal ']' '^' '[' INT ',' INT ']'
//            | '(' formula ')'
//   literal := '!'? IDENT
//
// Operator precedence: hold > '|' > '.'; parentheses override. Throws
// SyntaxError with a character position on malformed input, SemanticError on
// infeasible windows.
Ast parse(const std::string& text);

// Printed normal form. parse(print(ast)) rebuilds the identical tree.
std::string print(const Ast& ast);

// Time bound ||phi(0)||, the episode length T:
//   ||hold|| = b,  ||f1 . f2|| = ||f1|| + ||f2|| + 1,  ||f1 | f2|| = max.
long long time_bound(const Ast& ast);

// Time bound of the relaxed formula phi(tau): every deadline b becomes b+tau.
// time_bound_relaxed(ast, 0) == time_bound(ast).
long long time_bound_relaxed(const Ast& ast, long long tau);

// Atoms appearing in hold literals (negation stripped), lexicographic order.
std::vector<std::string> literal_alphabet(const Ast& ast);

}  // namespace shieldrl::twtl
