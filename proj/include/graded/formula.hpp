#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graded/error.hpp"
#include "graded/grades.hpp"
#include "graded/poset.hpp"

namespace graded {

inline constexpr std::string_view kReservedAtom = "p0";

// Formula of the multimodal graded language. Immutable value type.
class Formula {
public:
  enum class Kind { Atom, True, False, Not, And, Or, Implies, Iff, Box };

  Formula() : kind_(Kind::True) {}

  Kind kind() const { return kind_; }
  const std::string& atom() const { return atom_; }
  const GradeExpr& grade() const { return grade_; }
  const Formula& child() const { return kids_[0]; }  // Not, Box
  const Formula& lhs() const { return kids_[0]; }
  const Formula& rhs() const { return kids_[1]; }

  static Formula mk_atom(std::string id) {
    Formula f;
    f.kind_ = Kind::Atom;
    f.atom_ = std::move(id);
    return f;
  }
  static Formula mk_true() { return Formula(); }
  static Formula mk_false() {
    Formula f;
    f.kind_ = Kind::False;
    return f;
  }
  static Formula mk_not(Formula g) {
    Formula f;
    f.kind_ = Kind::Not;
    f.kids_ = {std::move(g)};
    return f;
  }
  static Formula mk_box(GradeExpr e, Formula g) {
    Formula f;
    f.kind_ = Kind::Box;
    f.grade_ = std::move(e);
    f.kids_ = {std::move(g)};
    return f;
  }
  static Formula mk_and(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula mk_or(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula mk_implies(Formula a, Formula b) { return binary(Kind::Implies, std::move(a), std::move(b)); }
  static Formula mk_iff(Formula a, Formula b) { return binary(Kind::Iff, std::move(a), std::move(b)); }

private:
  static Formula binary(Kind k, Formula a, Formula b) {
    Formula f;
    f.kind_ = k;
    f.kids_ = {std::move(a), std::move(b)};
    return f;
  }

  Kind kind_;
  std::string atom_;
  GradeExpr grade_;
  std::vector<Formula> kids_;
};

// Structural equality with box parameters compared up to lattice equivalence.
inline bool equal_mod_grades(const GeneratorPoset& p, const Formula& a,
                             const Formula& b) {
  if (a.kind() != b.kind())
    return false;
  switch (a.kind()) {
  case Formula::Kind::Atom:
    return a.atom() == b.atom();
  case Formula::Kind::True:
  case Formula::Kind::False:
    return true;
  case Formula::Kind::Not:
    return equal_mod_grades(p, a.child(), b.child());
  case Formula::Kind::Box:
    return normalize(p, a.grade()) == normalize(p, b.grade()) &&
           equal_mod_grades(p, a.child(), b.child());
  default:
    return equal_mod_grades(p, a.lhs(), b.lhs()) &&
           equal_mod_grades(p, a.rhs(), b.rhs());
  }
}

namespace detail {

// precedence: iff 1 < implies 2 < or 3 < and 4 < prefix 5
inline void print_formula_rec(const Formula& f, int parent_prec, std::string& out) {
  switch (f.kind()) {
  case Formula::Kind::Atom:
    out += f.atom();
    return;
  case Formula::Kind::True:
    out += "true";
    return;
  case Formula::Kind::False:
    out += "false";
    return;
  case Formula::Kind::Not:
    out += '!';
    print_formula_rec(f.child(), 5, out);
    return;
  case Formula::Kind::Box: {
    out += '[';
    out += to_string(f.grade());
    out += "] ";
    print_formula_rec(f.child(), 5, out);
    return;
  }
  case Formula::Kind::And: {
    bool paren = parent_prec > 4;
    if (paren) out += '(';
    print_formula_rec(f.lhs(), 4, out);
    out += " & ";
    print_formula_rec(f.rhs(), 5, out);
    if (paren) out += ')';
    return;
  }
  case Formula::Kind::Or: {
    bool paren = parent_prec > 3;
    if (paren) out += '(';
    print_formula_rec(f.lhs(), 3, out);
    out += " | ";
    print_formula_rec(f.rhs(), 4, out);
    if (paren) out += ')';
    return;
  }
  case Formula::Kind::Implies: {
    bool paren = parent_prec > 2;
    if (paren) out += '(';
    print_formula_rec(f.lhs(), 3, out);  // right-associative
    out += " -> ";
    print_formula_rec(f.rhs(), 2, out);
    if (paren) out += ')';
    return;
  }
  case Formula::Kind::Iff: {
    bool paren = parent_prec > 1;
    if (paren) out += '(';
    print_formula_rec(f.lhs(), 2, out);
    out += " <-> ";
    print_formula_rec(f.rhs(), 1, out);
    if (paren) out += ')';
    return;
  }
  }
}

struct FormulaLexer {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() &&
           (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' || src[pos] == '\r'))
      ++pos;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (src.substr(pos, tok.size()) == tok) {
      // '->' must not consume the prefix of '<->' handled by ordering at call site
      pos += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("formula: " + msg + " at position " + std::to_string(pos));
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (start == pos || !std::isalpha(static_cast<unsigned char>(src[start])))
      fail("expected identifier");
    return std::string(src.substr(start, pos - start));
  }
};

inline Formula parse_iff(FormulaLexer& lx, const GeneratorPoset& p);

inline Formula parse_unary(FormulaLexer& lx, const GeneratorPoset& p) {
  char c = lx.peek();
  if (c == '!') {
    lx.eat("!");
    return Formula::mk_not(parse_unary(lx, p));
  }
  if (c == '[') {
    lx.eat("[");
    std::size_t start = lx.pos;
    int depth = 1;
    while (lx.pos < lx.src.size() && depth > 0) {
      if (lx.src[lx.pos] == '[') ++depth;
      if (lx.src[lx.pos] == ']') --depth;
      if (depth > 0) ++lx.pos;
    }
    if (depth != 0)
      lx.fail("unterminated '['");
    GradeExpr g = parse_grade_expr(lx.src.substr(start, lx.pos - start), p);
    ++lx.pos; // ']'
    return Formula::mk_box(std::move(g), parse_unary(lx, p));
  }
  if (c == '(') {
    lx.eat("(");
    Formula f = parse_iff(lx, p);
    if (!lx.eat(")"))
      lx.fail("expected ')'");
    return f;
  }
  std::string id = lx.ident();
  if (id == "true")
    return Formula::mk_true();
  if (id == "false")
    return Formula::mk_false();
  return Formula::mk_atom(std::move(id));
}

inline Formula parse_and(FormulaLexer& lx, const GeneratorPoset& p) {
  Formula f = parse_unary(lx, p);
  while (lx.peek() == '&') {
    lx.eat("&");
    f = Formula::mk_and(std::move(f), parse_unary(lx, p));
  }
  return f;
}

inline Formula parse_or(FormulaLexer& lx, const GeneratorPoset& p) {
  Formula f = parse_and(lx, p);
  while (lx.peek() == '|') {
    lx.eat("|");
    f = Formula::mk_or(std::move(f), parse_and(lx, p));
  }
  return f;
}

inline Formula parse_implies(FormulaLexer& lx, const GeneratorPoset& p) {
  Formula f = parse_or(lx, p);
  if (lx.peek() == '-') {
    if (!lx.eat("->"))
      lx.fail("expected '->'");
    return Formula::mk_implies(std::move(f), parse_implies(lx, p));
  }
  return f;
}

inline Formula parse_iff(FormulaLexer& lx, const GeneratorPoset& p) {
  Formula f = parse_implies(lx, p);
  if (lx.peek() == '<') {
    if (!lx.eat("<->"))
      lx.fail("expected '<->'");
    return Formula::mk_iff(std::move(f), parse_iff(lx, p));
  }
  return f;
}

} // namespace detail

inline Formula parse_formula(std::string_view text, const GeneratorPoset& p) {
  detail::FormulaLexer lx{text};
  Formula f = detail::parse_iff(lx, p);
  lx.skip_ws();
  if (lx.pos != text.size())
    lx.fail("trailing input");
  return f;
}

inline std::string print_formula(const Formula& f) {
  std::string out;
  detail::print_formula_rec(f, 0, out);
  return out;
}

struct FormulaStats {
  std::set<std::string> atoms;
  bool uses_reserved = false;
  int modal_depth = 0;
  std::vector<GradeExpr> grades;
};

inline void analyze_rec(const Formula& f, int depth, FormulaStats& st) {
  switch (f.kind()) {
  case Formula::Kind::Atom:
    st.atoms.insert(f.atom());
    if (f.atom() == kReservedAtom)
      st.uses_reserved = true;
    return;
  case Formula::Kind::True:
  case Formula::Kind::False:
    return;
  case Formula::Kind::Not:
    analyze_rec(f.child(), depth, st);
    return;
  case Formula::Kind::Box:
    st.grades.push_back(f.grade());
    st.modal_depth = std::max(st.modal_depth, depth + 1);
    analyze_rec(f.child(), depth + 1, st);
    return;
  default:
    analyze_rec(f.lhs(), depth, st);
    analyze_rec(f.rhs(), depth, st);
  }
}

inline FormulaStats analyze(const Formula& f) {
  FormulaStats st;
  analyze_rec(f, 0, st);
  return st;
}

} // namespace graded
