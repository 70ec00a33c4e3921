#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "shieldrl/errors.hpp"
#include "shieldrl/twtl.hpp"
#include "support/semantics_oracle.hpp"

using namespace shieldrl;

namespace {

const char* kPickup =
    "[H^1 P]^[0,20] . ([H^1 D1]^[0,20] | [H^1 D2]^[0,20]) . [H^1 Base]^[0,20]";

}  // namespace

TEST_CASE("pickup-delivery formula parses into the expected tree") {
  twtl::Ast ast = twtl::parse(kPickup);
  REQUIRE(ast->kind == twtl::NodeKind::Concat);
  // Left-associative: ((P-hold . (D1|D2)) . Base-hold).
  CHECK(ast->right->kind == twtl::NodeKind::Hold);
  CHECK(ast->right->literal.atom == "Base");
  REQUIRE(ast->left->kind == twtl::NodeKind::Concat);
  CHECK(ast->left->left->kind == twtl::NodeKind::Hold);
  CHECK(ast->left->left->literal.atom == "P");
  REQUIRE(ast->left->right->kind == twtl::NodeKind::Disjunct);
  CHECK(ast->left->right->left->literal.atom == "D1");
  CHECK(ast->left->right->right->literal.atom == "D2");
}

TEST_CASE("smallest legal formula") {
  twtl::Ast ast = twtl::parse("[H^0 A]^[0,0]");
  REQUIRE(ast->kind == twtl::NodeKind::Hold);
  CHECK(ast->duration == 0);
  CHECK(ast->literal.atom == "A");
  CHECK_FALSE(ast->literal.negated);
  CHECK(ast->window_lo == 0);
  CHECK(ast->window_hi == 0);
}

TEST_CASE("infeasible windows are semantic errors") {
  CHECK_THROWS_AS(twtl::parse("[H^3 A]^[0,2]"), SemanticError);
  CHECK_THROWS_AS(twtl::parse("[H^1 A]^[3,2]"), SemanticError);
}

TEST_CASE("syntax errors carry a position") {
  try {
    twtl::parse("[H^1 A]^[0,");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position == 11);
  }
  CHECK_THROWS_AS(twtl::parse(""), SyntaxError);
  CHECK_THROWS_AS(twtl::parse("[H^1 A]^[0,2] ."), SyntaxError);
  CHECK_THROWS_AS(twtl::parse("[G^1 A]^[0,2]"), SyntaxError);
  CHECK_THROWS_AS(twtl::parse("[H^1 A]^[0,2] extra"), SyntaxError);
  CHECK_THROWS_AS(twtl::parse("([H^1 A]^[0,2]"), SyntaxError);
}

TEST_CASE("time bounds") {
  CHECK(twtl::time_bound(twtl::parse(kPickup)) == 62);
  CHECK(twtl::time_bound(twtl::parse("[H^1 A]^[1,3]")) == 3);
  CHECK(twtl::time_bound(twtl::parse("[H^1 D1]^[0,20] | [H^1 D2]^[0,20]")) ==
        20);
}

TEST_CASE("relaxed time bound extends every deadline") {
  twtl::Ast pickup = twtl::parse(kPickup);
  CHECK(twtl::time_bound_relaxed(pickup, 0) == twtl::time_bound(pickup));
  // Three windows on the concatenation spine, one per disjunct branch pair.
  CHECK(twtl::time_bound_relaxed(pickup, 1) == 65);
  CHECK(twtl::time_bound_relaxed(pickup, -2) == 56);
  twtl::Ast single = twtl::parse("[H^1 A]^[1,3]");
  CHECK(twtl::time_bound_relaxed(single, 5) == 8);
}

TEST_CASE("literal alphabet is sorted and strips negation") {
  auto alphabet = twtl::literal_alphabet(twtl::parse(kPickup));
  CHECK(alphabet == std::vector<std::string>{"Base", "D1", "D2", "P"});
  CHECK(twtl::literal_alphabet(twtl::parse("[H^0 A]^[0,0]")) ==
        std::vector<std::string>{"A"});
  CHECK(twtl::literal_alphabet(twtl::parse("[H^1 !A]^[0,2]")) ==
        std::vector<std::string>{"A"});
}

TEST_CASE("print round-trips the pickup formula verbatim") {
  twtl::Ast ast = twtl::parse(kPickup);
  CHECK(twtl::print(ast) == kPickup);
}

TEST_CASE("parse(print(ast)) is the identity on random formulas") {
  RngStream rng(2024);
  for (int i = 0; i < 200; ++i) {
    twtl::Ast ast = testing::random_formula(rng, 3);
    std::string text = twtl::print(ast);
    CAPTURE(text);
    twtl::Ast reparsed = twtl::parse(text);
    CHECK(twtl::equal(ast, reparsed));
    CHECK(twtl::print(reparsed) == text);
  }
}

namespace {

// Rebuilds the tree with one hold's deadline bumped by 1; holds are counted
// left to right.
twtl::Ast bump_deadline(const twtl::Ast& ast, int& index) {
  if (ast->kind == twtl::NodeKind::Hold) {
    int b = ast->window_hi + (index-- == 0 ? 1 : 0);
    return twtl::hold(ast->duration, ast->literal, ast->window_lo, b);
  }
  twtl::Ast left = bump_deadline(ast->left, index);
  twtl::Ast right = bump_deadline(ast->right, index);
  return ast->kind == twtl::NodeKind::Concat ? twtl::concat(left, right)
                                             : twtl::disjunct(left, right);
}

int count_holds(const twtl::Ast& ast) {
  if (ast->kind == twtl::NodeKind::Hold) return 1;
  return count_holds(ast->left) + count_holds(ast->right);
}

bool has_disjunct(const twtl::Ast& ast) {
  if (ast->kind == twtl::NodeKind::Hold) return false;
  if (ast->kind == twtl::NodeKind::Disjunct) return true;
  return has_disjunct(ast->left) || has_disjunct(ast->right);
}

}  // namespace

TEST_CASE("time bound is monotone in every deadline") {
  RngStream rng(7);
  for (int i = 0; i < 200; ++i) {
    twtl::Ast ast = testing::random_formula(rng, 3);
    long long base = twtl::time_bound(ast);
    int holds = count_holds(ast);
    for (int h = 0; h < holds; ++h) {
      int index = h;
      twtl::Ast bumped = bump_deadline(ast, index);
      long long delta = twtl::time_bound(bumped) - base;
      CHECK(delta >= 0);
      CHECK(delta <= 1);
      // Without disjunction every deadline sits on the concat spine.
      if (!has_disjunct(ast)) CHECK(delta == 1);
    }
  }
}

TEST_CASE("every parsed hold satisfies d <= b - a") {
  RngStream rng(99);
  for (int i = 0; i < 200; ++i) {
    twtl::Ast ast = testing::random_formula(rng, 3);
    std::string text = twtl::print(ast);
    std::function<void(const twtl::Ast&)> walk = [&](const twtl::Ast& n) {
      if (n->kind == twtl::NodeKind::Hold) {
        CHECK(n->duration <= n->window_hi - n->window_lo);
        CHECK(n->window_lo <= n->window_hi);
      } else {
        walk(n->left);
        walk(n->right);
      }
    };
    walk(twtl::parse(text));
  }
}
