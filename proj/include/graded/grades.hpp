#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graded/error.hpp"
#include "graded/poset.hpp"

namespace graded {

// Expression over the generators, built from meet (&) and join (|).
struct GradeExpr {
  enum class Kind { Leaf, Meet, Join };

  Kind kind = Kind::Leaf;
  std::string id;                // Leaf
  std::vector<GradeExpr> kids;   // Meet/Join: exactly two

  static GradeExpr leaf(std::string g) {
    GradeExpr e;
    e.kind = Kind::Leaf;
    e.id = std::move(g);
    return e;
  }
  static GradeExpr meet(GradeExpr a, GradeExpr b) {
    GradeExpr e;
    e.kind = Kind::Meet;
    e.kids = {std::move(a), std::move(b)};
    return e;
  }
  static GradeExpr join(GradeExpr a, GradeExpr b) {
    GradeExpr e;
    e.kind = Kind::Join;
    e.kids = {std::move(a), std::move(b)};
    return e;
  }
};

namespace detail {

// prec: join 1, meet 2
inline void print_grade(const GradeExpr& e, int parent_prec, std::string& out) {
  switch (e.kind) {
  case GradeExpr::Kind::Leaf:
    out += e.id;
    return;
  case GradeExpr::Kind::Join: {
    bool paren = parent_prec > 1;
    if (paren) out += '(';
    print_grade(e.kids[0], 1, out);
    out += " | ";
    print_grade(e.kids[1], 1, out);
    if (paren) out += ')';
    return;
  }
  case GradeExpr::Kind::Meet: {
    bool paren = parent_prec > 2;
    if (paren) out += '(';
    print_grade(e.kids[0], 2, out);
    out += " & ";
    print_grade(e.kids[1], 2, out);
    if (paren) out += ')';
    return;
  }
  }
}

struct GradeLexer {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t'))
      ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (start == pos ||
        !std::isalpha(static_cast<unsigned char>(src[start])))
      throw ParseError("grade expression: expected identifier at position " +
                       std::to_string(start));
    return std::string(src.substr(start, pos - start));
  }
};

inline GradeExpr parse_grade_join(GradeLexer& lx, const GeneratorPoset& p);

inline GradeExpr parse_grade_atom(GradeLexer& lx, const GeneratorPoset& p) {
  if (lx.eat('(')) {
    GradeExpr e = parse_grade_join(lx, p);
    if (!lx.eat(')'))
      throw ParseError("grade expression: expected ')' at position " +
                       std::to_string(lx.pos));
    return e;
  }
  std::string id = lx.ident();
  if (!p.declared(id))
    throw ValidationError("undeclared generator '" + id + "'");
  return GradeExpr::leaf(std::move(id));
}

inline GradeExpr parse_grade_meet(GradeLexer& lx, const GeneratorPoset& p) {
  GradeExpr e = parse_grade_atom(lx, p);
  while (lx.peek() == '&') {
    lx.eat('&');
    e = GradeExpr::meet(std::move(e), parse_grade_atom(lx, p));
  }
  return e;
}

inline GradeExpr parse_grade_join(GradeLexer& lx, const GeneratorPoset& p) {
  GradeExpr e = parse_grade_meet(lx, p);
  while (lx.peek() == '|') {
    lx.eat('|');
    e = GradeExpr::join(std::move(e), parse_grade_meet(lx, p));
  }
  return e;
}

} // namespace detail

inline std::string to_string(const GradeExpr& e) {
  std::string out;
  detail::print_grade(e, 0, out);
  return out;
}

inline GradeExpr parse_grade_expr(std::string_view text, const GeneratorPoset& p) {
  detail::GradeLexer lx{text};
  GradeExpr e = detail::parse_grade_join(lx, p);
  lx.skip_ws();
  if (lx.pos != text.size())
    throw ParseError("grade expression: trailing input at position " +
                     std::to_string(lx.pos));
  return e;
}

// Canonical element of the generated distributive lattice: a join of meets,
// where each meet-set is an antichain of generators (minimal elements kept)
// and the clause set is an antichain under the meet-set order (maximal
// clauses kept). Clause members and clauses are sorted, so equivalent
// expressions normalize to identical objects.
class GradeNF {
public:
  GradeNF() = default;

  const std::vector<std::vector<int>>& clauses() const { return clauses_; }

  bool operator==(const GradeNF& o) const { return clauses_ == o.clauses_; }
  bool operator!=(const GradeNF& o) const { return clauses_ != o.clauses_; }
  bool operator<(const GradeNF& o) const { return clauses_ < o.clauses_; }

  static GradeNF generator(const GeneratorPoset& p, std::string_view g) {
    GradeNF nf;
    nf.clauses_ = {{p.index_of(g)}};
    return nf;
  }

  static GradeNF top(const GeneratorPoset& p) {
    GradeNF nf;
    nf.clauses_ = {{p.top_index()}};
    return nf;
  }

  static GradeNF from_clauses(const GeneratorPoset& p,
                              std::vector<std::vector<int>> raw) {
    GradeNF nf;
    for (auto& c : raw)
      nf.clauses_.push_back(reduce_meetset(p, std::move(c)));
    nf.clauses_ = reduce_clauses(p, std::move(nf.clauses_));
    return nf;
  }

  // meet-set S is below meet-set T iff for every t in T some s in S has s <= t
  static bool clause_leq(const GeneratorPoset& p, const std::vector<int>& s,
                         const std::vector<int>& t) {
    for (int tg : t) {
      bool hit = false;
      for (int sg : s)
        if (p.leq(sg, tg)) {
          hit = true;
          break;
        }
      if (!hit)
        return false;
    }
    return true;
  }

private:
  static std::vector<int> reduce_meetset(const GeneratorPoset& p,
                                         std::vector<int> c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    std::vector<int> out;
    for (int g : c) {
      bool minimal = true;
      for (int h : c)
        if (h != g && p.leq(h, g)) {
          minimal = false;
          break;
        }
      if (minimal)
        out.push_back(g);
    }
    return out;
  }

  static std::vector<std::vector<int>> reduce_clauses(
      const GeneratorPoset& p, std::vector<std::vector<int>> cs) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < cs.size(); ++j)
        if (i != j && clause_leq(p, cs[i], cs[j])) {
          dominated = true;
          break;
        }
      if (!dominated)
        out.push_back(cs[i]);
    }
    return out;
  }

  std::vector<std::vector<int>> clauses_;
};

inline GradeNF normalize(const GeneratorPoset& p, const GradeExpr& e) {
  switch (e.kind) {
  case GradeExpr::Kind::Leaf:
    return GradeNF::generator(p, e.id);
  case GradeExpr::Kind::Join: {
    auto a = normalize(p, e.kids[0]).clauses();
    auto b = normalize(p, e.kids[1]).clauses();
    a.insert(a.end(), b.begin(), b.end());
    return GradeNF::from_clauses(p, std::move(a));
  }
  case GradeExpr::Kind::Meet: {
    auto a = normalize(p, e.kids[0]).clauses();
    auto b = normalize(p, e.kids[1]).clauses();
    std::vector<std::vector<int>> prod;
    for (const auto& ca : a)
      for (const auto& cb : b) {
        auto c = ca;
        c.insert(c.end(), cb.begin(), cb.end());
        prod.push_back(std::move(c));
      }
    return GradeNF::from_clauses(p, std::move(prod));
  }
  }
  throw Error("unreachable");
}

inline bool grade_leq(const GeneratorPoset& p, const GradeNF& a, const GradeNF& b) {
  for (const auto& sa : a.clauses()) {
    bool hit = false;
    for (const auto& sb : b.clauses())
      if (GradeNF::clause_leq(p, sa, sb)) {
        hit = true;
        break;
      }
    if (!hit)
      return false;
  }
  return true;
}

inline GradeNF grade_join(const GeneratorPoset& p, const GradeNF& a, const GradeNF& b) {
  auto cs = a.clauses();
  const auto& bc = b.clauses();
  cs.insert(cs.end(), bc.begin(), bc.end());
  return GradeNF::from_clauses(p, std::move(cs));
}

inline GradeNF grade_meet(const GeneratorPoset& p, const GradeNF& a, const GradeNF& b) {
  std::vector<std::vector<int>> prod;
  for (const auto& ca : a.clauses())
    for (const auto& cb : b.clauses()) {
      auto c = ca;
      c.insert(c.end(), cb.begin(), cb.end());
      prod.push_back(std::move(c));
    }
  return GradeNF::from_clauses(p, std::move(prod));
}

// Canonical expression of a normal form: left-folded join of left-folded meets.
inline GradeExpr to_expr(const GeneratorPoset& p, const GradeNF& nf) {
  GradeExpr acc;
  bool first_clause = true;
  for (const auto& clause : nf.clauses()) {
    GradeExpr m = GradeExpr::leaf(p.name(clause[0]));
    for (std::size_t i = 1; i < clause.size(); ++i)
      m = GradeExpr::meet(std::move(m), GradeExpr::leaf(p.name(clause[i])));
    if (first_clause) {
      acc = std::move(m);
      first_clause = false;
    } else {
      acc = GradeExpr::join(std::move(acc), std::move(m));
    }
  }
  return acc;
}

inline std::string to_string(const GeneratorPoset& p, const GradeNF& nf) {
  std::string out;
  bool multi = nf.clauses().size() > 1;
  for (std::size_t i = 0; i < nf.clauses().size(); ++i) {
    if (i)
      out += " | ";
    const auto& clause = nf.clauses()[i];
    bool paren = multi && clause.size() > 1;
    if (paren)
      out += '(';
    for (std::size_t j = 0; j < clause.size(); ++j) {
      if (j)
        out += " & ";
      out += p.name(clause[j]);
    }
    if (paren)
      out += ')';
  }
  return out;
}

namespace detail {

inline bool eval_grade(const GradeExpr& e, const GeneratorPoset& p,
                       std::uint32_t valuation) {
  switch (e.kind) {
  case GradeExpr::Kind::Leaf:
    return (valuation >> p.index_of(e.id)) & 1u;
  case GradeExpr::Kind::Meet:
    return eval_grade(e.kids[0], p, valuation) && eval_grade(e.kids[1], p, valuation);
  case GradeExpr::Kind::Join:
    return eval_grade(e.kids[0], p, valuation) || eval_grade(e.kids[1], p, valuation);
  }
  return false;
}

} // namespace detail

// Independent order oracle: the generated lattice is separated by monotone
// maps into the two-element lattice, so e1 <= e2 holds exactly when every
// order-preserving 0/1 assignment to the generators gives eval(e1) <= eval(e2).
// Exponential in the generator count; intended for desk-scale posets.
inline bool oracle_leq(const GeneratorPoset& p, const GradeExpr& e1,
                       const GradeExpr& e2) {
  const int n = p.size();
  if (n > 24)
    throw Error("oracle_leq: poset too large");
  for (std::uint32_t v = 0; v < (1u << n); ++v) {
    bool monotone = true;
    for (int i = 0; i < n && monotone; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && p.leq(i, j) && ((v >> i) & 1u) > ((v >> j) & 1u)) {
          monotone = false;
          break;
        }
    if (!monotone)
      continue;
    if (detail::eval_grade(e1, p, v) && !detail::eval_grade(e2, p, v))
      return false;
  }
  return true;
}

struct LatticeEnumeration {
  std::vector<GradeNF> elements;               // sorted by clause representation
  std::vector<std::pair<int, int>> cover_edges; // (lower, upper) indices
};

// Closes the generator set under meet and join. Guarded: free distributive
// lattices grow double-exponentially in the generator count.
inline LatticeEnumeration enumerate_lattice(const GeneratorPoset& p,
                                            std::size_t max_elements = 10000) {
  if (p.size() > 8)
    throw Error("enumerate_lattice: more than 8 generators");
  std::set<GradeNF> elems;
  for (const auto& g : p.generators())
    elems.insert(GradeNF::generator(p, g));
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<GradeNF> snapshot(elems.begin(), elems.end());
    for (std::size_t i = 0; i < snapshot.size(); ++i)
      for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
        for (auto&& candidate : {grade_meet(p, snapshot[i], snapshot[j]),
                                 grade_join(p, snapshot[i], snapshot[j])}) {
          if (elems.insert(candidate).second) {
            grew = true;
            if (elems.size() > max_elements)
              throw Error("enumerate_lattice: element guard exceeded");
          }
        }
      }
  }
  LatticeEnumeration out;
  out.elements.assign(elems.begin(), elems.end());
  const int n = static_cast<int>(out.elements.size());
  auto leq = [&](int a, int b) {
    return grade_leq(p, out.elements[a], out.elements[b]);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b || !leq(a, b) || leq(b, a))
        continue;
      bool covering = true;
      for (int c = 0; c < n && covering; ++c) {
        if (c == a || c == b)
          continue;
        if (leq(a, c) && !leq(c, a) && leq(c, b) && !leq(b, c))
          covering = false;
      }
      if (covering)
        out.cover_edges.emplace_back(a, b);
    }
  return out;
}

} // namespace graded
