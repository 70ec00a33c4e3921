#include "shieldrl/twtl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "shieldrl/errors.hpp"

namespace shieldrl::twtl {

namespace {

constexpr long long kMaxWindow = 1'000'000'000;

}  // namespace

Ast hold(int duration, Literal literal, int window_lo, int window_hi) {
  if (duration < 0 || window_lo < 0 || window_hi < 0)
    throw SemanticError("hold parameters must be non-negative");
  if (literal.atom.empty()) throw SemanticError("hold literal must name an atom");
  if (window_lo > window_hi)
    throw SemanticError("window [" + std::to_string(window_lo) + "," +
                        std::to_string(window_hi) + "] is empty (a > b)");
  if (duration > window_hi - window_lo)
    throw SemanticError("hold duration " + std::to_string(duration) +
                        " exceeds window capacity b-a=" +
                        std::to_string(window_hi - window_lo));
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Hold;
  n->duration = duration;
  n->literal = std::move(literal);
  n->window_lo = window_lo;
  n->window_hi = window_hi;
  return n;
}

Ast concat(Ast left, Ast right) {
  if (!left || !right) throw SemanticError("concat requires two children");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Concat;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

Ast disjunct(Ast left, Ast right) {
  if (!left || !right) throw SemanticError("disjunct requires two children");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Disjunct;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

bool equal(const Ast& a, const Ast& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Hold:
      return a->duration == b->duration && a->literal == b->literal &&
             a->window_lo == b->window_lo && a->window_hi == b->window_hi;
    case NodeKind::Concat:
    case NodeKind::Disjunct:
      return equal(a->left, b->left) && equal(a->right, b->right);
  }
  return false;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Ast run() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("empty specification", 0);
    Ast f = formula();
    skip_ws();
    if (pos_ < text_.size())
      throw SyntaxError("unexpected trailing input", pos_);
    return f;
  }

 private:
  // formula := term ('.' term)*
  Ast formula() {
    Ast f = term();
    while (peek() == '.') {
      ++pos_;
      f = concat(std::move(f), term());
    }
    return f;
  }

  // term := factor ('|' factor)*
  Ast term() {
    Ast f = factor();
    while (peek() == '|') {
      ++pos_;
      f = disjunct(std::move(f), factor());
    }
    return f;
  }

  Ast factor() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Ast f = formula();
      expect(')');
      return f;
    }
    if (c != '[') throw SyntaxError("expected '[' or '('", pos_);
    ++pos_;
    std::string op = ident();
    if (op != "H") throw SyntaxError("expected hold operator 'H'", pos_);
    expect('^');
    int d = integer();
    Literal lit = literal();
    expect(']');
    expect('^');
    expect('[');
    std::size_t window_at = pos_;
    int a = integer();
    expect(',');
    int b = integer();
    expect(']');
    try {
      return hold(d, std::move(lit), a, b);
    } catch (const SemanticError& e) {
      throw SemanticError(std::string(e.what()) + " (window at position " +
                          std::to_string(window_at) + ")");
    }
  }

  Literal literal() {
    Literal lit;
    if (peek() == '!') {
      ++pos_;
      lit.negated = true;
    }
    lit.atom = ident();
    return lit;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start || std::isdigit(static_cast<unsigned char>(text_[start])))
      throw SyntaxError("expected identifier", start);
    return text_.substr(start, pos_ - start);
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    long long v = 0;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > kMaxWindow) throw SyntaxError("integer too large", start);
      ++pos_;
    }
    if (pos_ == start) throw SyntaxError("expected integer", start);
    return static_cast<int>(v);
  }

  void expect(char c) {
    if (peek() != c)
      throw SyntaxError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  // Returns the next significant character without consuming it; '\0' at end.
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void print_node(const Node& n, std::ostringstream& out) {
  switch (n.kind) {
    case NodeKind::Hold:
      out << "[H^" << n.duration << ' ' << (n.literal.negated ? "!" : "")
          << n.literal.atom << "]^[" << n.window_lo << ',' << n.window_hi
          << ']';
      return;
    case NodeKind::Concat: {
      // '.' is left-associative and binds loosest: a right-nested concat
      // needs parentheses to round-trip; disjunct children take them too so
      // the normal form reads unambiguously.
      if (n.left->kind == NodeKind::Disjunct) {
        out << '(';
        print_node(*n.left, out);
        out << ')';
      } else {
        print_node(*n.left, out);
      }
      out << " . ";
      if (n.right->kind == NodeKind::Hold) {
        print_node(*n.right, out);
      } else {
        out << '(';
        print_node(*n.right, out);
        out << ')';
      }
      return;
    }
    case NodeKind::Disjunct: {
      if (n.left->kind == NodeKind::Concat) {
        out << '(';
        print_node(*n.left, out);
        out << ')';
      } else {
        print_node(*n.left, out);
      }
      out << " | ";
      if (n.right->kind != NodeKind::Hold) {
        out << '(';
        print_node(*n.right, out);
        out << ')';
      } else {
        print_node(*n.right, out);
      }
      return;
    }
  }
}

}  // namespace

Ast parse(const std::string& text) { return Parser(text).run(); }

std::string print(const Ast& ast) {
  if (!ast) throw SemanticError("cannot print empty formula");
  std::ostringstream out;
  print_node(*ast, out);
  return out.str();
}

long long time_bound_relaxed(const Ast& ast, long long tau) {
  if (!ast) throw SemanticError("time bound of empty formula");
  switch (ast->kind) {
    case NodeKind::Hold:
      return ast->window_hi + tau;
    case NodeKind::Concat:
      return time_bound_relaxed(ast->left, tau) +
             time_bound_relaxed(ast->right, tau) + 1;
    case NodeKind::Disjunct:
      return std::max(time_bound_relaxed(ast->left, tau),
                      time_bound_relaxed(ast->right, tau));
  }
  return 0;
}

long long time_bound(const Ast& ast) { return time_bound_relaxed(ast, 0); }

namespace {

void collect_atoms(const Node& n, std::set<std::string>& atoms) {
  if (n.kind == NodeKind::Hold) {
    atoms.insert(n.literal.atom);
    return;
  }
  collect_atoms(*n.left, atoms);
  collect_atoms(*n.right, atoms);
}

}  // namespace

std::vector<std::string> literal_alphabet(const Ast& ast) {
  if (!ast) return {};
  std::set<std::string> atoms;
  collect_atoms(*ast, atoms);
  return {atoms.begin(), atoms.end()};
}

}  // namespace shieldrl::twtl
