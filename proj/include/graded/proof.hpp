#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graded/error.hpp"
#include "graded/formula.hpp"
#include "graded/grades.hpp"
#include "graded/poset.hpp"

namespace graded {

struct Justification {
  enum class Kind {
    Taut, K, Dtop, A1, A2, A3, A4, A5,
    Mp, Nec, Glb, Gen,
    Ag, Gmp, Weak  // derived rules, macro-expanded before checking
  };

  Kind kind = Kind::Taut;
  int ref1 = 0; // 1-based line references; 0 = unused
  int ref2 = 0;

  static Justification simple(Kind k) { return {k, 0, 0}; }
  static Justification one(Kind k, int i) { return {k, i, 0}; }
  static Justification two(Kind k, int i, int j) { return {k, i, j}; }

  bool derived() const {
    return kind == Kind::Ag || kind == Kind::Gmp || kind == Kind::Weak;
  }

  std::string to_string() const {
    auto with_refs = [&](std::string name) {
      if (ref1)
        name += " " + std::to_string(ref1);
      if (ref2)
        name += " " + std::to_string(ref2);
      return name;
    };
    switch (kind) {
    case Kind::Taut: return "taut";
    case Kind::K: return "K";
    case Kind::Dtop: return "Dtop";
    case Kind::A1: return "A1";
    case Kind::A2: return "A2";
    case Kind::A3: return "A3";
    case Kind::A4: return "A4";
    case Kind::A5: return "A5";
    case Kind::Mp: return with_refs("mp");
    case Kind::Nec: return with_refs("nec");
    case Kind::Glb: return with_refs("glb");
    case Kind::Gen: return with_refs("gen");
    case Kind::Ag: return "ag";
    case Kind::Gmp: return with_refs("gmp");
    case Kind::Weak: return with_refs("weak");
    }
    return "?";
  }
};

struct ProofLine {
  Formula formula;
  Justification just;
};

struct Proof {
  GeneratorPoset poset;
  std::vector<ProofLine> lines;

  const Formula& conclusion() const {
    if (lines.empty())
      throw Error("empty proof");
    return lines.back().formula;
  }
};

struct CheckResult {
  bool accepted = true;
  std::vector<std::string> diagnostics; // one entry per rejected line

  void reject(std::size_t line_1based, const std::string& msg) {
    accepted = false;
    diagnostics.push_back("line " + std::to_string(line_1based) + ": " + msg);
  }
};

namespace detail {

// Rendering used for tautology abstraction: grades are replaced by their
// canonical normal form, so equivalent box operators map to one variable.
inline std::string abstract_key(const GeneratorPoset& p, const Formula& f) {
  switch (f.kind()) {
  case Formula::Kind::Atom:
    return "a:" + f.atom();
  case Formula::Kind::True:
    return "1";
  case Formula::Kind::False:
    return "0";
  case Formula::Kind::Not:
    return "!(" + abstract_key(p, f.child()) + ")";
  case Formula::Kind::Box:
    return "[" + to_string(p, normalize(p, f.grade())) + "](" +
           abstract_key(p, f.child()) + ")";
  case Formula::Kind::And:
    return "(" + abstract_key(p, f.lhs()) + "&" + abstract_key(p, f.rhs()) + ")";
  case Formula::Kind::Or:
    return "(" + abstract_key(p, f.lhs()) + "|" + abstract_key(p, f.rhs()) + ")";
  case Formula::Kind::Implies:
    return "(" + abstract_key(p, f.lhs()) + ">" + abstract_key(p, f.rhs()) + ")";
  case Formula::Kind::Iff:
    return "(" + abstract_key(p, f.lhs()) + "=" + abstract_key(p, f.rhs()) + ")";
  }
  return "?";
}

inline void collect_taut_vars(const GeneratorPoset& p, const Formula& f,
                              std::map<std::string, int>& vars) {
  switch (f.kind()) {
  case Formula::Kind::Atom:
  case Formula::Kind::Box: {
    std::string key = abstract_key(p, f);
    if (!vars.count(key)) {
      int next = static_cast<int>(vars.size());
      vars.emplace(std::move(key), next);
    }
    return;
  }
  case Formula::Kind::True:
  case Formula::Kind::False:
    return;
  case Formula::Kind::Not:
    collect_taut_vars(p, f.child(), vars);
    return;
  default:
    collect_taut_vars(p, f.lhs(), vars);
    collect_taut_vars(p, f.rhs(), vars);
  }
}

inline bool eval_taut(const GeneratorPoset& p, const Formula& f,
                      const std::map<std::string, int>& vars, std::uint32_t bits) {
  switch (f.kind()) {
  case Formula::Kind::Atom:
  case Formula::Kind::Box:
    return (bits >> vars.at(abstract_key(p, f))) & 1u;
  case Formula::Kind::True:
    return true;
  case Formula::Kind::False:
    return false;
  case Formula::Kind::Not:
    return !eval_taut(p, f.child(), vars, bits);
  case Formula::Kind::And:
    return eval_taut(p, f.lhs(), vars, bits) && eval_taut(p, f.rhs(), vars, bits);
  case Formula::Kind::Or:
    return eval_taut(p, f.lhs(), vars, bits) || eval_taut(p, f.rhs(), vars, bits);
  case Formula::Kind::Implies:
    return !eval_taut(p, f.lhs(), vars, bits) || eval_taut(p, f.rhs(), vars, bits);
  case Formula::Kind::Iff:
    return eval_taut(p, f.lhs(), vars, bits) == eval_taut(p, f.rhs(), vars, bits);
  }
  return false;
}

} // namespace detail

// Classical tautology test treating atoms and maximal box-subformulas as
// propositional variables; box operators with equivalent grades share one
// variable.
inline bool is_tautology(const GeneratorPoset& p, const Formula& f) {
  std::map<std::string, int> vars;
  detail::collect_taut_vars(p, f, vars);
  if (vars.size() > 22)
    throw Error("tautology check: too many distinct subformulas");
  for (std::uint32_t bits = 0; bits < (1u << vars.size()); ++bits)
    if (!detail::eval_taut(p, f, vars, bits))
      return false;
  return true;
}

namespace detail {

inline bool is_p0(const Formula& f) {
  return f.kind() == Formula::Kind::Atom && f.atom() == kReservedAtom;
}

struct BoxImp { // [b]body -> [a]body
  const GradeExpr* antecedent_grade;
  const GradeExpr* consequent_grade;
  const Formula* body;
};

inline std::optional<BoxImp> match_box_implication(const GeneratorPoset& p,
                                                   const Formula& f) {
  if (f.kind() != Formula::Kind::Implies ||
      f.lhs().kind() != Formula::Kind::Box || f.rhs().kind() != Formula::Kind::Box)
    return std::nullopt;
  if (!equal_mod_grades(p, f.lhs().child(), f.rhs().child()))
    return std::nullopt;
  return BoxImp{&f.lhs().grade(), &f.rhs().grade(), &f.lhs().child()};
}

} // namespace detail

class ProofChecker {
public:
  explicit ProofChecker(const Proof& proof) : pr_(proof), p_(proof.poset) {}

  CheckResult run() {
    CheckResult res;
    for (std::size_t i = 0; i < pr_.lines.size(); ++i) {
      std::string msg;
      if (!check_line(i, msg))
        res.reject(i + 1, msg);
    }
    return res;
  }

private:
  const Proof& pr_;
  const GeneratorPoset& p_;

  GradeNF nf(const GradeExpr& e) const { return normalize(p_, e); }
  GradeNF nf_meet(const GradeExpr& a, const GradeExpr& b) const {
    return grade_meet(p_, nf(a), nf(b));
  }
  GradeNF nf_join(const GradeExpr& a, const GradeExpr& b) const {
    return grade_join(p_, nf(a), nf(b));
  }

  bool cited(std::size_t at, int ref, const Formula*& out, std::string& msg) const {
    if (ref < 1 || static_cast<std::size_t>(ref) > at) {
      msg = "citation of line " + std::to_string(ref) + " is out of range";
      return false;
    }
    out = &pr_.lines[ref - 1].formula;
    return true;
  }

  bool check_line(std::size_t i, std::string& msg) {
    const Formula& f = pr_.lines[i].formula;
    const Justification& j = pr_.lines[i].just;
    using K = Justification::Kind;
    switch (j.kind) {
    case K::Taut:
      if (is_tautology(p_, f))
        return true;
      msg = "not a classical tautology over box-atoms";
      return false;
    case K::K:
      return check_axiom_k(f, msg);
    case K::Dtop:
      if (f.kind() == Formula::Kind::Not &&
          f.child().kind() == Formula::Kind::Box &&
          f.child().child().kind() == Formula::Kind::False &&
          nf(f.child().grade()) == GradeNF::top(p_))
        return true;
      msg = "expected !['top-equivalent grade'] false";
      return false;
    case K::A1:
      return check_axiom_a1(f, msg);
    case K::A2:
      return check_axiom_a2(f, msg);
    case K::A3:
      return check_axiom_a3(f, msg);
    case K::A4:
      return check_axiom_a4(f, msg);
    case K::A5:
      return check_axiom_a5(f, msg);
    case K::Mp: {
      const Formula *fi, *fj;
      if (!cited(i, j.ref1, fi, msg) || !cited(i, j.ref2, fj, msg))
        return false;
      if (fj->kind() == Formula::Kind::Implies &&
          equal_mod_grades(p_, fj->lhs(), *fi) &&
          equal_mod_grades(p_, fj->rhs(), f))
        return true;
      msg = "mp: cited line " + std::to_string(j.ref2) +
            " is not (line " + std::to_string(j.ref1) + " -> this line)";
      return false;
    }
    case K::Nec: {
      const Formula* fi;
      if (!cited(i, j.ref1, fi, msg))
        return false;
      if (f.kind() == Formula::Kind::Box && nf(f.grade()) == GradeNF::top(p_) &&
          equal_mod_grades(p_, f.child(), *fi))
        return true;
      msg = "nec: expected [top](cited line)";
      return false;
    }
    case K::Glb:
      return check_glb(i, f, j, msg);
    case K::Gen: {
      const Formula* fi;
      if (!cited(i, j.ref1, fi, msg))
        return false;
      auto src = detail::match_box_implication(p_, *fi);
      if (!src || !detail::is_p0(*src->body)) {
        msg = "gen: cited line is not of the form [b]p0 -> [a]p0";
        return false;
      }
      auto dst = detail::match_box_implication(p_, f);
      if (!dst) {
        msg = "gen: this line is not of the form [b]A -> [a]A";
        return false;
      }
      if (nf(*dst->antecedent_grade) == nf(*src->antecedent_grade) &&
          nf(*dst->consequent_grade) == nf(*src->consequent_grade))
        return true;
      msg = "gen: grades do not match the cited order line";
      return false;
    }
    case K::Ag:
    case K::Gmp:
    case K::Weak:
      return check_derived(i, f, j, msg);
    }
    msg = "unknown justification";
    return false;
  }

  bool check_axiom_k(const Formula& f, std::string& msg) const {
    // [a](A -> B) -> ([a]A -> [a]B)
    if (f.kind() == Formula::Kind::Implies &&
        f.lhs().kind() == Formula::Kind::Box &&
        f.lhs().child().kind() == Formula::Kind::Implies &&
        f.rhs().kind() == Formula::Kind::Implies &&
        f.rhs().lhs().kind() == Formula::Kind::Box &&
        f.rhs().rhs().kind() == Formula::Kind::Box) {
      const Formula& A = f.lhs().child().lhs();
      const Formula& B = f.lhs().child().rhs();
      GradeNF g = nf(f.lhs().grade());
      if (nf(f.rhs().lhs().grade()) == g && nf(f.rhs().rhs().grade()) == g &&
          equal_mod_grades(p_, f.rhs().lhs().child(), A) &&
          equal_mod_grades(p_, f.rhs().rhs().child(), B))
        return true;
    }
    msg = "K: expected [a](A -> B) -> ([a]A -> [a]B)";
    return false;
  }

  bool check_axiom_a1(const Formula& f, std::string& msg) const {
    // ([a]A & [b]A) -> [a|b]A
    if (f.kind() == Formula::Kind::Implies &&
        f.lhs().kind() == Formula::Kind::And &&
        f.lhs().lhs().kind() == Formula::Kind::Box &&
        f.lhs().rhs().kind() == Formula::Kind::Box &&
        f.rhs().kind() == Formula::Kind::Box) {
      const Formula& A = f.lhs().lhs().child();
      if (equal_mod_grades(p_, f.lhs().rhs().child(), A) &&
          equal_mod_grades(p_, f.rhs().child(), A) &&
          nf(f.rhs().grade()) ==
              nf_join(f.lhs().lhs().grade(), f.lhs().rhs().grade()))
        return true;
    }
    msg = "A1: expected ([a]A & [b]A) -> [a|b]A";
    return false;
  }

  bool check_axiom_a2(const Formula& f, std::string& msg) const {
    // ([a]p0 | [b]p0) -> [a&b]p0
    if (f.kind() == Formula::Kind::Implies &&
        f.lhs().kind() == Formula::Kind::Or &&
        f.lhs().lhs().kind() == Formula::Kind::Box &&
        f.lhs().rhs().kind() == Formula::Kind::Box &&
        f.rhs().kind() == Formula::Kind::Box &&
        detail::is_p0(f.lhs().lhs().child()) &&
        detail::is_p0(f.lhs().rhs().child()) &&
        detail::is_p0(f.rhs().child()) &&
        nf(f.rhs().grade()) ==
            nf_meet(f.lhs().lhs().grade(), f.lhs().rhs().grade()))
      return true;
    msg = "A2: expected ([a]p0 | [b]p0) -> [a&b]p0 (body restricted to p0)";
    return false;
  }

  bool check_axiom_a3(const Formula& f, std::string& msg) const {
    // [a|b]p0 -> ([a]p0 & [b]p0)
    if (f.kind() == Formula::Kind::Implies &&
        f.lhs().kind() == Formula::Kind::Box &&
        f.rhs().kind() == Formula::Kind::And &&
        f.rhs().lhs().kind() == Formula::Kind::Box &&
        f.rhs().rhs().kind() == Formula::Kind::Box &&
        detail::is_p0(f.lhs().child()) &&
        detail::is_p0(f.rhs().lhs().child()) &&
        detail::is_p0(f.rhs().rhs().child()) &&
        nf(f.lhs().grade()) ==
            nf_join(f.rhs().lhs().grade(), f.rhs().rhs().grade()))
      return true;
    msg = "A3: expected [a|b]p0 -> ([a]p0 & [b]p0) (body restricted to p0)";
    return false;
  }

  bool check_axiom_a4(const Formula& f, std::string& msg) const {
    // ([a&b]p0 | [a&c]p0) -> [a&(b|c)]p0; by distributivity the consequent
    // grade is exactly the join of the antecedent grades.
    if (f.kind() == Formula::Kind::Implies &&
        f.lhs().kind() == Formula::Kind::Or &&
        f.lhs().lhs().kind() == Formula::Kind::Box &&
        f.lhs().rhs().kind() == Formula::Kind::Box &&
        f.rhs().kind() == Formula::Kind::Box &&
        detail::is_p0(f.lhs().lhs().child()) &&
        detail::is_p0(f.lhs().rhs().child()) &&
        detail::is_p0(f.rhs().child()) &&
        nf(f.rhs().grade()) ==
            nf_join(f.lhs().lhs().grade(), f.lhs().rhs().grade()))
      return true;
    msg = "A4: expected ([a&b]p0 | [a&c]p0) -> [a&(b|c)]p0 (body restricted to p0)";
    return false;
  }

  bool check_axiom_a5(const Formula& f, std::string& msg) const {
    auto m = detail::match_box_implication(p_, f);
    if (m && detail::is_p0(*m->body) &&
        m->antecedent_grade->kind == GradeExpr::Kind::Leaf &&
        m->consequent_grade->kind == GradeExpr::Kind::Leaf) {
      const std::string& hi = m->antecedent_grade->id;
      const std::string& lo = m->consequent_grade->id;
      if (lo != hi && p_.leq(lo, hi))
        return true;
    }
    msg = "A5: expected [a]p0 -> [b]p0 with generators b < a";
    return false;
  }

  bool check_glb(std::size_t i, const Formula& f, const Justification& j,
                 std::string& msg) const {
    const Formula *fi, *fj;
    if (!cited(i, j.ref1, fi, msg) || !cited(i, j.ref2, fj, msg))
      return false;
    auto m1 = detail::match_box_implication(p_, *fi);
    auto m2 = detail::match_box_implication(p_, *fj);
    auto mt = detail::match_box_implication(p_, f);
    if (!m1 || !m2 || !mt) {
      msg = "glb: lines must be implications between boxes over one body";
      return false;
    }
    if (!detail::is_p0(*m1->body) || !detail::is_p0(*m2->body) ||
        !detail::is_p0(*mt->body)) {
      msg = "glb: rule is restricted to the reserved atom p0";
      return false;
    }
    GradeNF target = nf(*m1->consequent_grade);
    if (nf(*m2->consequent_grade) != target ||
        nf(*mt->consequent_grade) != target) {
      msg = "glb: consequent grades differ";
      return false;
    }
    if (nf(*mt->antecedent_grade) !=
        grade_meet(p_, nf(*m1->antecedent_grade), nf(*m2->antecedent_grade))) {
      msg = "glb: antecedent grade is not the meet of the cited antecedents";
      return false;
    }
    return true;
  }

  bool check_derived(std::size_t i, const Formula& f, const Justification& j,
                     std::string& msg);
};

// ---------------------------------------------------------------------------
// Proof construction helpers. Each builder appends lines to a proof and
// returns the (0-based) index of the line that proves its result.

class ProofBuilder {
public:
  explicit ProofBuilder(const GeneratorPoset& p) : p_(p) {}

  std::vector<ProofLine>& lines() { return lines_; }

  std::size_t add(Formula f, Justification j) {
    lines_.push_back({std::move(f), j});
    return lines_.size() - 1;
  }

  std::size_t taut(Formula f) {
    return add(std::move(f), Justification::simple(Justification::Kind::Taut));
  }

  // from i: X -> Y and j: Y -> Z derive X -> Z
  std::size_t syllogism(std::size_t i, std::size_t j) {
    const Formula xy = lines_[i].formula;  // copies: push_back invalidates refs
    const Formula yz = lines_[j].formula;
    Formula xz = Formula::mk_implies(xy.lhs(), yz.rhs());
    std::size_t t = taut(Formula::mk_implies(
        xy, Formula::mk_implies(yz, xz)));
    std::size_t u = add(Formula::mk_implies(yz, xz),
                        Justification::two(Justification::Kind::Mp,
                                           static_cast<int>(i) + 1,
                                           static_cast<int>(t) + 1));
    return add(std::move(xz),
               Justification::two(Justification::Kind::Mp,
                                  static_cast<int>(j) + 1,
                                  static_cast<int>(u) + 1));
  }

  // from i: X -> P, j: X -> Q and k: (P & Q) -> R derive X -> R
  std::size_t glue2(std::size_t i, std::size_t j, std::size_t k) {
    const Formula xp = lines_[i].formula;
    const Formula xq = lines_[j].formula;
    const Formula pqr = lines_[k].formula;
    Formula xr = Formula::mk_implies(xp.lhs(), pqr.rhs());
    std::size_t t = taut(Formula::mk_implies(
        xp, Formula::mk_implies(xq, Formula::mk_implies(pqr, xr))));
    std::size_t u = add(
        Formula::mk_implies(xq, Formula::mk_implies(pqr, xr)),
        Justification::two(Justification::Kind::Mp, static_cast<int>(i) + 1,
                           static_cast<int>(t) + 1));
    std::size_t v = add(
        Formula::mk_implies(pqr, xr),
        Justification::two(Justification::Kind::Mp, static_cast<int>(j) + 1,
                           static_cast<int>(u) + 1));
    return add(std::move(xr),
               Justification::two(Justification::Kind::Mp,
                                  static_cast<int>(k) + 1,
                                  static_cast<int>(v) + 1));
  }

  std::size_t mp(std::size_t i, std::size_t j) {
    const Formula imp = lines_[j].formula;
    return add(imp.rhs(), Justification::two(Justification::Kind::Mp,
                                             static_cast<int>(i) + 1,
                                             static_cast<int>(j) + 1));
  }

  // Theorem [upper-expr]p0 -> [lower-expr]p0 for lower <= upper; mirrors the
  // inductive construction over A5, A2, A3, glb, A1 and propositional glue.
  std::size_t order_theorem(const GradeNF& lower, const GradeNF& upper) {
    if (!grade_leq(p_, lower, upper))
      throw Error("order_theorem: order does not hold");
    Formula p0 = Formula::mk_atom(std::string(kReservedAtom));
    GradeExpr upper_expr = to_expr(p_, upper);
    Formula upper_box = Formula::mk_box(upper_expr, p0);
    if (lower == upper)
      return taut(Formula::mk_implies(upper_box, upper_box));

    auto clause_nf = [&](const std::vector<int>& c) {
      return GradeNF::from_clauses(p_, {c});
    };
    auto clause_expr = [&](const std::vector<int>& c) {
      return to_expr(p_, clause_nf(c));
    };

    const auto& lo_clauses = lower.clauses();
    const auto& up_clauses = upper.clauses();

    std::vector<std::size_t> per_clause; // [upper]p0 -> [S_i]p0 per lower clause
    for (const auto& S : lo_clauses) {
      // pick a dominating upper clause
      const std::vector<int>* T = nullptr;
      for (const auto& cand : up_clauses)
        if (GradeNF::clause_leq(p_, S, cand)) {
          T = &cand;
          break;
        }
      if (!T)
        throw Error("order_theorem: no dominating clause");

      Formula t_box = Formula::mk_box(clause_expr(*T), p0);
      Formula s_box = Formula::mk_box(clause_expr(S), p0);

      // [upper]p0 -> [T]p0
      std::optional<std::size_t> proj;
      if (up_clauses.size() > 1) {
        // A3 with the remaining clauses folded into one grade
        std::vector<std::vector<int>> rest;
        for (const auto& c : up_clauses)
          if (&c != T)
            rest.push_back(c);
        GradeExpr rest_expr = to_expr(p_, GradeNF::from_clauses(p_, rest));
        Formula split = Formula::mk_implies(
            upper_box,
            Formula::mk_and(t_box, Formula::mk_box(rest_expr, p0)));
        std::size_t a3 =
            add(split, Justification::simple(Justification::Kind::A3));
        Formula projected = Formula::mk_implies(upper_box, t_box);
        std::size_t t =
            taut(Formula::mk_implies(split, projected));
        proj = add(projected,
                   Justification::two(Justification::Kind::Mp,
                                      static_cast<int>(a3) + 1,
                                      static_cast<int>(t) + 1));
      }

      // [T]p0 -> [S]p0
      std::optional<std::size_t> desc;
      if (clause_nf(*T) != clause_nf(S)) {
        std::vector<std::size_t> per_gen; // [t]p0 -> [S]p0 for each t in T
        for (int t_gen : *T) {
          int s_gen = -1;
          for (int cand : S)
            if (p_.leq(cand, t_gen)) {
              s_gen = cand;
              break;
            }
          Formula tg_box = Formula::mk_box(GradeExpr::leaf(p_.name(t_gen)), p0);
          Formula sg_box = Formula::mk_box(GradeExpr::leaf(p_.name(s_gen)), p0);
          std::size_t drop;
          if (s_gen == t_gen)
            drop = taut(Formula::mk_implies(tg_box, tg_box));
          else
            drop = add(Formula::mk_implies(tg_box, sg_box),
                       Justification::simple(Justification::Kind::A5));
          std::size_t into = drop;
          if (S.size() > 1) {
            // A2: ([s]p0 | [rest]p0) -> [s & rest]p0, then project the left disjunct
            std::vector<int> rest;
            for (int g : S)
              if (g != s_gen)
                rest.push_back(g);
            GradeExpr rest_expr = clause_expr(rest);
            Formula rest_box = Formula::mk_box(rest_expr, p0);
            GradeExpr meet_expr = GradeExpr::meet(
                GradeExpr::leaf(p_.name(s_gen)), rest_expr);
            Formula meet_box = Formula::mk_box(meet_expr, p0);
            Formula a2f = Formula::mk_implies(
                Formula::mk_or(sg_box, rest_box), meet_box);
            std::size_t a2 =
                add(a2f, Justification::simple(Justification::Kind::A2));
            Formula narrowed = Formula::mk_implies(sg_box, meet_box);
            std::size_t t = taut(Formula::mk_implies(a2f, narrowed));
            std::size_t n =
                add(narrowed, Justification::two(Justification::Kind::Mp,
                                                 static_cast<int>(a2) + 1,
                                                 static_cast<int>(t) + 1));
            // grade of meet_box is NF-equal to clause S; restate with the
            // canonical clause expression via syllogism with identity taut
            std::size_t id = taut(Formula::mk_implies(meet_box, s_box));
            n = syllogism(n, id);
            // chain the A5 descent in front: [t]p0 -> [s]p0 -> [S]p0
            into = (s_gen == t_gen) ? n : syllogism(drop, n);
          }
          per_gen.push_back(into);
        }
        // combine the per-generator lines with the glb rule
        std::size_t cur = per_gen[0];
        GradeExpr acc = GradeExpr::leaf(p_.name((*T)[0]));
        for (std::size_t k = 1; k < per_gen.size(); ++k) {
          acc = GradeExpr::meet(acc, GradeExpr::leaf(p_.name((*T)[k])));
          Formula comb = Formula::mk_implies(
              Formula::mk_box(acc, p0),
              lines_[cur].formula.rhs());
          cur = add(comb, Justification::two(Justification::Kind::Glb,
                                             static_cast<int>(cur) + 1,
                                             static_cast<int>(per_gen[k]) + 1));
        }
        // restate antecedent as the canonical clause expression
        if (per_gen.size() > 1) {
          std::size_t id =
              taut(Formula::mk_implies(t_box, lines_[cur].formula.lhs()));
          cur = syllogism(id, cur);
        }
        desc = cur;
      }

      std::size_t line;
      if (proj && desc)
        line = syllogism(*proj, *desc);
      else if (proj)
        line = *proj;
      else if (desc)
        line = *desc;
      else
        line = taut(Formula::mk_implies(upper_box, s_box));
      // ensure shape [upper]p0 -> [S]p0 with canonical expressions
      const Formula got = lines_[line].formula;
      Formula want = Formula::mk_implies(upper_box, s_box);
      if (print_formula(got) != print_formula(want)) {
        std::size_t fix = taut(Formula::mk_implies(got, want));
        line = add(want, Justification::two(Justification::Kind::Mp,
                                            static_cast<int>(line) + 1,
                                            static_cast<int>(fix) + 1));
      }
      per_clause.push_back(line);
    }

    // fold the lower clauses together with A1
    std::size_t cur = per_clause[0];
    GradeExpr acc = clause_expr(lo_clauses[0]);
    Formula p0f = Formula::mk_atom(std::string(kReservedAtom));
    for (std::size_t k = 1; k < per_clause.size(); ++k) {
      GradeExpr next = clause_expr(lo_clauses[k]);
      GradeExpr joined = GradeExpr::join(acc, next);
      Formula a1f = Formula::mk_implies(
          Formula::mk_and(Formula::mk_box(acc, p0f), Formula::mk_box(next, p0f)),
          Formula::mk_box(joined, p0f));
      std::size_t a1 = add(a1f, Justification::simple(Justification::Kind::A1));
      cur = glue2(cur, per_clause[k], a1);
      acc = std::move(joined);
    }
    return cur;
  }

  // Theorem [from]F -> [to]F where NF(to) <= NF(from).
  // By-value parameters: callers often pass references into lines_.
  std::size_t weaken_theorem(GradeExpr from, GradeExpr to, Formula body) {
    GradeNF lo = normalize(p_, to);
    GradeNF hi = normalize(p_, from);
    std::size_t ord = order_theorem(lo, hi);
    Formula want = Formula::mk_implies(Formula::mk_box(from, body),
                                       Formula::mk_box(to, body));
    return add(std::move(want),
               Justification::one(Justification::Kind::Gen,
                                  static_cast<int>(ord) + 1));
  }

private:
  const GeneratorPoset& p_;
  std::vector<ProofLine> lines_;
};

// Constructive side of the order/provability correspondence: a checkable
// proof of [upper]p0 -> [lower]p0 whenever lower <= upper in the lattice.
inline Proof prove_order(const GeneratorPoset& p, const GradeNF& lower,
                         const GradeNF& upper) {
  ProofBuilder b(p);
  b.order_theorem(lower, upper);
  return Proof{p, std::move(b.lines())};
}

namespace detail {

// Expansion of a derived-justified line into core-justified lines.
// The expansion's final line proves exactly `target`.
inline std::vector<ProofLine> expand_derived_line(
    const GeneratorPoset& p, const Formula& target, const Justification& j,
    const std::vector<ProofLine>& prior, std::string& err) {
  ProofBuilder b(p);
  // Citations refer into `prior`; expansion lines are appended after it, so
  // builder indices are shifted by prior.size() when spliced. We build with a
  // local convention: negative refs index `prior`. To keep it simple the
  // builder works on a copy of prior plus new lines.
  for (const auto& ln : prior)
    b.lines().push_back(ln);
  const std::size_t base = prior.size();
  using K = Justification::Kind;

  auto fail = [&](const std::string& m) {
    err = m;
    return std::vector<ProofLine>{};
  };

  Formula p0 = Formula::mk_atom(std::string(kReservedAtom));

  switch (j.kind) {
  case K::Weak: {
    if (j.ref1 < 1 || static_cast<std::size_t>(j.ref1) > base)
      return fail("weak: citation out of range");
    const Formula& src = prior[j.ref1 - 1].formula;
    if (src.kind() != Formula::Kind::Box || target.kind() != Formula::Kind::Box)
      return fail("weak: both lines must be box formulas");
    if (!equal_mod_grades(p, src.child(), target.child()))
      return fail("weak: bodies differ");
    GradeNF lo = normalize(p, target.grade());
    GradeNF hi = normalize(p, src.grade());
    if (!grade_leq(p, lo, hi))
      return fail("weak: target grade is not below the cited grade");
    std::size_t w = b.weaken_theorem(src.grade(), target.grade(), src.child());
    std::size_t m = b.add(target, Justification::two(K::Mp, j.ref1,
                                                     static_cast<int>(w) + 1));
    (void)m;
    break;
  }
  case K::Gmp: {
    if (j.ref1 < 1 || static_cast<std::size_t>(j.ref1) > base ||
        j.ref2 < 1 || static_cast<std::size_t>(j.ref2) > base)
      return fail("gmp: citation out of range");
    const Formula& fa = prior[j.ref1 - 1].formula; // [a]A
    const Formula& fb = prior[j.ref2 - 1].formula; // [b](A -> B)
    if (fa.kind() != Formula::Kind::Box || fb.kind() != Formula::Kind::Box ||
        fb.child().kind() != Formula::Kind::Implies ||
        target.kind() != Formula::Kind::Box)
      return fail("gmp: expected [a]A, [b](A -> B) and a box conclusion");
    const Formula& A = fb.child().lhs();
    const Formula& B = fb.child().rhs();
    if (!equal_mod_grades(p, fa.child(), A) ||
        !equal_mod_grades(p, target.child(), B))
      return fail("gmp: formulas do not line up");
    GradeNF c = grade_meet(p, normalize(p, fa.grade()), normalize(p, fb.grade()));
    if (normalize(p, target.grade()) != c)
      return fail("gmp: conclusion grade is not the meet of the premise grades");
    const GradeExpr& cg = target.grade();
    std::size_t w1 = b.weaken_theorem(fa.grade(), cg, A);
    std::size_t m1 = b.add(Formula::mk_box(cg, A),
                           Justification::two(K::Mp, j.ref1,
                                              static_cast<int>(w1) + 1));
    std::size_t w2 = b.weaken_theorem(fb.grade(), cg, fb.child());
    std::size_t m2 = b.add(Formula::mk_box(cg, fb.child()),
                           Justification::two(K::Mp, j.ref2,
                                              static_cast<int>(w2) + 1));
    Formula kf = Formula::mk_implies(
        Formula::mk_box(cg, Formula::mk_implies(A, B)),
        Formula::mk_implies(Formula::mk_box(cg, A), Formula::mk_box(cg, B)));
    std::size_t k = b.add(std::move(kf), Justification::simple(K::K));
    std::size_t s = b.add(
        Formula::mk_implies(Formula::mk_box(cg, A), Formula::mk_box(cg, B)),
        Justification::two(K::Mp, static_cast<int>(m2) + 1,
                           static_cast<int>(k) + 1));
    b.add(target, Justification::two(K::Mp, static_cast<int>(m1) + 1,
                                     static_cast<int>(s) + 1));
    break;
  }
  case K::Ag: {
    // ([a]A & [b](A -> B)) -> [a&b]B
    if (target.kind() != Formula::Kind::Implies ||
        target.lhs().kind() != Formula::Kind::And ||
        target.lhs().lhs().kind() != Formula::Kind::Box ||
        target.lhs().rhs().kind() != Formula::Kind::Box ||
        target.lhs().rhs().child().kind() != Formula::Kind::Implies ||
        target.rhs().kind() != Formula::Kind::Box)
      return fail("ag: expected ([a]A & [b](A -> B)) -> [a&b]B");
    const Formula& boxA = target.lhs().lhs();
    const Formula& boxImp = target.lhs().rhs();
    const Formula& A = boxImp.child().lhs();
    const Formula& B = boxImp.child().rhs();
    if (!equal_mod_grades(p, boxA.child(), A) ||
        !equal_mod_grades(p, target.rhs().child(), B))
      return fail("ag: formulas do not line up");
    GradeNF c = grade_meet(p, normalize(p, boxA.grade()),
                           normalize(p, boxImp.grade()));
    if (normalize(p, target.rhs().grade()) != c)
      return fail("ag: conclusion grade is not the meet of the premise grades");
    const GradeExpr& cg = target.rhs().grade();
    std::size_t t1 = b.weaken_theorem(boxA.grade(), cg, boxA.child());
    std::size_t t2 = b.weaken_theorem(boxImp.grade(), cg, boxImp.child());
    Formula kf = Formula::mk_implies(
        Formula::mk_box(cg, boxImp.child()),
        Formula::mk_implies(Formula::mk_box(cg, boxA.child()),
                            Formula::mk_box(cg, B)));
    std::size_t t3 = b.add(std::move(kf), Justification::simple(K::K));
    const Formula f1 = b.lines()[t1].formula;
    const Formula f2 = b.lines()[t2].formula;
    const Formula f3 = b.lines()[t3].formula;
    std::size_t t = b.taut(Formula::mk_implies(
        f1, Formula::mk_implies(f2, Formula::mk_implies(f3, target))));
    std::size_t u = b.add(
        Formula::mk_implies(b.lines()[t2].formula,
                            Formula::mk_implies(b.lines()[t3].formula, target)),
        Justification::two(K::Mp, static_cast<int>(t1) + 1,
                           static_cast<int>(t) + 1));
    std::size_t v = b.add(
        Formula::mk_implies(b.lines()[t3].formula, target),
        Justification::two(K::Mp, static_cast<int>(t2) + 1,
                           static_cast<int>(u) + 1));
    b.add(target, Justification::two(K::Mp, static_cast<int>(t3) + 1,
                                     static_cast<int>(v) + 1));
    break;
  }
  default:
    return fail("not a derived justification");
  }
  // strip the copied prior lines
  std::vector<ProofLine> out(b.lines().begin() + static_cast<long>(base),
                             b.lines().end());
  return out;
}

} // namespace detail

// Expands every derived-justified line into core lines. Line citations are
// remapped; the result is accepted by the core rules iff the original is
// accepted by the full rule set.
inline Proof expand_proof(const Proof& pr) {
  Proof out{pr.poset, {}};
  std::vector<int> remap(pr.lines.size()); // old 1-based -> new 1-based
  for (std::size_t i = 0; i < pr.lines.size(); ++i) {
    const ProofLine& ln = pr.lines[i];
    Justification j = ln.just;
    if (j.ref1)
      j.ref1 = remap[j.ref1 - 1];
    if (j.ref2)
      j.ref2 = remap[j.ref2 - 1];
    if (!j.derived()) {
      out.lines.push_back({ln.formula, j});
      remap[i] = static_cast<int>(out.lines.size());
      continue;
    }
    std::string err;
    auto expansion =
        detail::expand_derived_line(pr.poset, ln.formula, j, out.lines, err);
    if (expansion.empty())
      throw ValidationError("line " + std::to_string(i + 1) + ": " + err);
    for (auto& el : expansion)
      out.lines.push_back(std::move(el));
    remap[i] = static_cast<int>(out.lines.size());
  }
  return out;
}

inline bool ProofChecker::check_derived(std::size_t i, const Formula& f,
                                        const Justification& j,
                                        std::string& msg) {
  std::vector<ProofLine> prior(pr_.lines.begin(),
                               pr_.lines.begin() + static_cast<long>(i));
  std::string err;
  auto expansion = detail::expand_derived_line(p_, f, j, prior, err);
  if (expansion.empty()) {
    msg = err;
    return false;
  }
  Proof sub{p_, prior};
  sub.lines.insert(sub.lines.end(), expansion.begin(), expansion.end());
  // Prior lines were already checked (or will be reported separately); only
  // the expansion lines decide this line's verdict.
  ProofChecker sc(sub);
  for (std::size_t k = prior.size(); k < sub.lines.size(); ++k) {
    std::string m;
    if (!sc.check_line(k, m)) {
      msg = "expansion failed: " + m;
      return false;
    }
  }
  if (!equal_mod_grades(p_, sub.lines.back().formula, f)) {
    msg = "expansion does not conclude the stated formula";
    return false;
  }
  return true;
}

inline CheckResult check_proof(const Proof& pr) {
  return ProofChecker(pr).run();
}

// ---------------------------------------------------------------------------
// Proof file format:
//   poset: <path>
//   <n>: <formula> ; <justification>
// Justifications: taut K Dtop A1..A5 | mp i j | nec i | glb i j | gen i |
// ag | gmp i j | weak i

inline Justification parse_justification(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  in >> name;
  using K = Justification::Kind;
  auto refs = [&](K k, int arity) {
    Justification j = Justification::simple(k);
    if (arity >= 1 && !(in >> j.ref1))
      throw ParseError("justification '" + name + "' needs a line reference");
    if (arity >= 2 && !(in >> j.ref2))
      throw ParseError("justification '" + name + "' needs two line references");
    std::string extra;
    if (in >> extra)
      throw ParseError("justification: trailing text '" + extra + "'");
    return j;
  };
  if (name == "taut") return refs(K::Taut, 0);
  if (name == "K") return refs(K::K, 0);
  if (name == "Dtop") return refs(K::Dtop, 0);
  if (name == "A1") return refs(K::A1, 0);
  if (name == "A2") return refs(K::A2, 0);
  if (name == "A3") return refs(K::A3, 0);
  if (name == "A4") return refs(K::A4, 0);
  if (name == "A5") return refs(K::A5, 0);
  if (name == "mp") return refs(K::Mp, 2);
  if (name == "nec") return refs(K::Nec, 1);
  if (name == "glb") return refs(K::Glb, 2);
  if (name == "gen") return refs(K::Gen, 1);
  if (name == "ag") return refs(K::Ag, 0);
  if (name == "gmp") return refs(K::Gmp, 2);
  if (name == "weak") return refs(K::Weak, 1);
  throw ParseError("unknown justification '" + name + "'");
}

struct RawProof {
  std::optional<std::string> poset_path;
  std::vector<std::pair<std::string, std::string>> lines; // formula ; just
};

inline RawProof parse_proof_text(std::string_view text) {
  RawProof raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  int expected = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line.erase(h);
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty())
      continue;
    if (trimmed.rfind("poset:", 0) == 0) {
      std::istringstream ls(trimmed.substr(6));
      std::string path;
      if (!(ls >> path))
        throw ParseError("proof line " + std::to_string(lineno) +
                         ": expected path after 'poset:'");
      raw.poset_path = path;
      continue;
    }
    auto colon = trimmed.find(':');
    auto semi = trimmed.rfind(';');
    if (colon == std::string::npos || semi == std::string::npos || semi < colon)
      throw ParseError("proof line " + std::to_string(lineno) +
                       ": expected '<n>: <formula> ; <justification>'");
    int num = 0;
    try {
      num = std::stoi(trimmed.substr(0, colon));
    } catch (...) {
      throw ParseError("proof line " + std::to_string(lineno) + ": bad line number");
    }
    if (num != expected)
      throw ParseError("proof line " + std::to_string(lineno) +
                       ": expected line number " + std::to_string(expected));
    ++expected;
    raw.lines.emplace_back(trimmed.substr(colon + 1, semi - colon - 1),
                           trimmed.substr(semi + 1));
  }
  return raw;
}

inline Proof make_proof(const RawProof& raw, const GeneratorPoset& p) {
  Proof pr{p, {}};
  for (std::size_t i = 0; i < raw.lines.size(); ++i) {
    Formula f = parse_formula(raw.lines[i].first, p);
    Justification j = parse_justification(raw.lines[i].second);
    pr.lines.push_back({std::move(f), j});
  }
  return pr;
}

inline std::string proof_to_text(const Proof& pr,
                                 const std::string& poset_path = "") {
  std::ostringstream out;
  if (!poset_path.empty())
    out << "poset: " << poset_path << '\n';
  for (std::size_t i = 0; i < pr.lines.size(); ++i)
    out << (i + 1) << ": " << print_formula(pr.lines[i].formula) << " ; "
        << pr.lines[i].just.to_string() << '\n';
  return out.str();
}

} // namespace graded
