#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graded/error.hpp"
#include "graded/formula.hpp"
#include "graded/grades.hpp"
#include "graded/poset.hpp"
#include "graded/proof.hpp"

namespace graded {

struct Fact {
  GradeExpr grade_expr;
  GradeNF grade;
  std::string atom;
};

struct Rule {
  GradeExpr grade_expr;
  GradeNF grade;
  std::vector<std::string> body; // non-empty, distinct atoms
  std::string head;
};

// Definite graded Horn fragment: graded atomic facts and graded implications
// from an atom conjunction to an atom.
struct KnowledgeBase {
  GeneratorPoset poset;
  std::vector<Fact> facts;
  std::vector<Rule> rules;

  Formula fact_formula(const Fact& f) const {
    return Formula::mk_box(f.grade_expr, Formula::mk_atom(f.atom));
  }
  Formula rule_formula(const Rule& r) const {
    Formula body = Formula::mk_atom(r.body[0]);
    for (std::size_t i = 1; i < r.body.size(); ++i)
      body = Formula::mk_and(std::move(body), Formula::mk_atom(r.body[i]));
    return Formula::mk_box(r.grade_expr,
                           Formula::mk_implies(std::move(body),
                                               Formula::mk_atom(r.head)));
  }
};

struct RawKnowledgeBase {
  std::optional<std::string> poset_path;
  std::vector<std::string> assertions;
};

inline RawKnowledgeBase parse_kb_text(std::string_view text) {
  RawKnowledgeBase raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line.erase(h);
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    while (!trimmed.empty() &&
           (trimmed.back() == ' ' || trimmed.back() == '\t' || trimmed.back() == '\r'))
      trimmed.pop_back();
    if (trimmed.empty())
      continue;
    if (trimmed.rfind("poset:", 0) == 0) {
      std::istringstream ls(trimmed.substr(6));
      std::string path;
      if (!(ls >> path))
        throw ParseError("kb line " + std::to_string(lineno) +
                         ": expected path after 'poset:'");
      raw.poset_path = path;
    } else if (trimmed.rfind("assert:", 0) == 0) {
      raw.assertions.push_back(trimmed.substr(7));
    } else {
      throw ParseError("kb line " + std::to_string(lineno) +
                       ": expected 'poset:' or 'assert:'");
    }
  }
  return raw;
}

// Each assertion is `[g] a` or `[g] (a1 & ... & an -> b)`.
inline KnowledgeBase make_kb(const RawKnowledgeBase& raw, const GeneratorPoset& p) {
  KnowledgeBase kb{p, {}, {}};
  for (std::size_t i = 0; i < raw.assertions.size(); ++i) {
    auto fragment_error = [&](const std::string& what) -> ValidationError {
      return ValidationError("assertion " + std::to_string(i + 1) + ": " + what);
    };
    Formula f = parse_formula(raw.assertions[i], p);
    if (f.kind() != Formula::Kind::Box)
      throw fragment_error("expected a graded assertion '[g] ...'");
    GradeExpr g = f.grade();
    const Formula& body = f.child();
    auto check_atom = [&](const Formula& a) -> const std::string& {
      if (a.kind() != Formula::Kind::Atom)
        throw fragment_error("outside the graded Horn fragment: " +
                             print_formula(a));
      if (a.atom() == kReservedAtom)
        throw fragment_error("reserved atom p0 may not carry knowledge");
      return a.atom();
    };
    if (body.kind() == Formula::Kind::Atom) {
      kb.facts.push_back(Fact{g, normalize(p, g), check_atom(body)});
    } else if (body.kind() == Formula::Kind::Implies) {
      std::vector<std::string> atoms;
      const Formula* cur = &body.lhs();
      while (cur->kind() == Formula::Kind::And) {
        atoms.push_back(check_atom(cur->rhs()));
        cur = &cur->lhs();
      }
      atoms.push_back(check_atom(*cur));
      std::reverse(atoms.begin(), atoms.end());
      for (std::size_t a = 0; a < atoms.size(); ++a)
        for (std::size_t b = a + 1; b < atoms.size(); ++b)
          if (atoms[a] == atoms[b])
            throw fragment_error("duplicate body atom '" + atoms[a] + "'");
      kb.rules.push_back(Rule{g, normalize(p, g), std::move(atoms),
                              check_atom(body.rhs())});
    } else {
      throw fragment_error("outside the graded Horn fragment: " +
                           print_formula(body));
    }
  }
  return kb;
}

using GradeMap = std::map<std::string, GradeNF>;

namespace detail {

struct SaturationEvent {
  std::string atom;
  GradeNF contribution;            // grade of this derivation step
  int source = -1;                 // fact index or rule index
  bool from_rule = false;
  std::vector<GradeNF> body_grades; // grades the rule fired with
};

struct SaturationTrace {
  GradeMap result;
  std::vector<SaturationEvent> events; // only grade-improving steps
};

inline SaturationTrace saturate_trace(const KnowledgeBase& kb) {
  const GeneratorPoset& p = kb.poset;
  SaturationTrace out;
  auto improve = [&](const std::string& atom, const GradeNF& g,
                     SaturationEvent ev) {
    auto it = out.result.find(atom);
    if (it == out.result.end()) {
      out.result.emplace(atom, g);
      out.events.push_back(std::move(ev));
      return true;
    }
    GradeNF joined = grade_join(p, it->second, g);
    if (joined == it->second)
      return false;
    it->second = std::move(joined);
    out.events.push_back(std::move(ev));
    return true;
  };
  for (std::size_t i = 0; i < kb.facts.size(); ++i)
    improve(kb.facts[i].atom, kb.facts[i].grade,
            SaturationEvent{kb.facts[i].atom, kb.facts[i].grade,
                            static_cast<int>(i), false, {}});
  // semi-naive: re-fire only rules whose body atoms changed in the last round
  std::vector<std::string> changed;
  for (const auto& [atom, g] : out.result)
    changed.push_back(atom);
  while (!changed.empty()) {
    std::vector<std::string> next_changed;
    for (std::size_t r = 0; r < kb.rules.size(); ++r) {
      const Rule& rule = kb.rules[r];
      bool touched = false;
      for (const auto& b : rule.body)
        for (const auto& c : changed)
          if (b == c)
            touched = true;
      if (!touched)
        continue;
      GradeNF g = rule.grade;
      std::vector<GradeNF> body_grades;
      bool complete = true;
      for (const auto& b : rule.body) {
        auto it = out.result.find(b);
        if (it == out.result.end()) {
          complete = false;
          break;
        }
        body_grades.push_back(it->second);
        g = grade_meet(p, g, it->second);
      }
      if (!complete)
        continue;
      if (improve(rule.head, g,
                  SaturationEvent{rule.head, g, static_cast<int>(r), true,
                                  body_grades}))
        next_changed.push_back(rule.head);
    }
    changed = std::move(next_changed);
  }
  return out;
}

} // namespace detail

// Least fixpoint of the graded immediate-consequence operator: each atom's
// grade is the join of its fact grades and, per rule, the meet of the rule
// grade with the body grades. Terminates because the generated lattice is
// finite and grades only increase.
inline GradeMap saturate(const KnowledgeBase& kb) {
  return detail::saturate_trace(kb).result;
}

struct QueryResult {
  GradeNF grade;
  Proof trace;
  std::vector<int> used_facts; // indices into kb.facts
  std::vector<int> used_rules; // indices into kb.rules
};

namespace detail {

// ([c]A & [c]B) -> [c](A & B), built from taut, nec, an order proof, gen
// and two applications of K.
inline std::size_t conj_theorem(ProofBuilder& b, const GeneratorPoset& p,
                                const GradeExpr& c, const Formula& A,
                                const Formula& B) {
  using K = Justification::Kind;
  Formula conj = Formula::mk_and(A, B);
  Formula step = Formula::mk_implies(A, Formula::mk_implies(B, conj));
  std::size_t t1 = b.taut(step);
  std::size_t t2 = b.add(Formula::mk_box(GradeExpr::leaf(p.top()), step),
                         Justification::one(K::Nec, static_cast<int>(t1) + 1));
  std::size_t boxed = t2;
  if (normalize(p, c) != GradeNF::top(p)) {
    std::size_t w =
        b.weaken_theorem(GradeExpr::leaf(p.top()), c, step);
    boxed = b.mp(t2, w);
  }
  Formula inner = Formula::mk_implies(B, conj);
  std::size_t k1 = b.add(
      Formula::mk_implies(
          Formula::mk_box(c, step),
          Formula::mk_implies(Formula::mk_box(c, A), Formula::mk_box(c, inner))),
      Justification::simple(K::K));
  std::size_t s1 = b.mp(boxed, k1); // [c]A -> [c](B -> A&B)
  std::size_t k2 = b.add(
      Formula::mk_implies(
          Formula::mk_box(c, inner),
          Formula::mk_implies(Formula::mk_box(c, B), Formula::mk_box(c, conj))),
      Justification::simple(K::K));
  Formula target = Formula::mk_implies(
      Formula::mk_and(Formula::mk_box(c, A), Formula::mk_box(c, B)),
      Formula::mk_box(c, conj));
  const Formula f1 = b.lines()[s1].formula;
  const Formula f2 = b.lines()[k2].formula;
  std::size_t t = b.taut(
      Formula::mk_implies(f1, Formula::mk_implies(f2, target)));
  std::size_t u = b.mp(s1, t);
  std::size_t v = b.add(target, Justification::two(K::Mp,
                                                   static_cast<int>(k2) + 1,
                                                   static_cast<int>(u) + 1));
  return v;
}

} // namespace detail

// Best derivable grade for an atom, with a proof trace whose conclusion is
// (conjunction of the cited KB premises) -> [grade]atom, checkable by the
// proof module.
inline QueryResult query(const KnowledgeBase& kb, const std::string& atom) {
  const GeneratorPoset& p = kb.poset;
  auto trace = detail::saturate_trace(kb);
  auto it = trace.result.find(atom);
  if (it == trace.result.end())
    throw Error("atom '" + atom + "' is not derivable");

  // premises reachable from the queried atom through the event log
  std::vector<char> fact_used(kb.facts.size(), 0), rule_used(kb.rules.size(), 0);
  std::vector<std::string> pending{atom};
  std::vector<std::string> seen{atom};
  while (!pending.empty()) {
    std::string a = pending.back();
    pending.pop_back();
    for (const auto& ev : trace.events) {
      if (ev.atom != a)
        continue;
      if (!ev.from_rule) {
        fact_used[ev.source] = 1;
        continue;
      }
      rule_used[ev.source] = 1;
      for (const auto& b : kb.rules[ev.source].body) {
        bool known = false;
        for (const auto& s : seen)
          if (s == b)
            known = true;
        if (!known) {
          seen.push_back(b);
          pending.push_back(b);
        }
      }
    }
  }

  GradeNF best = it->second;
  std::vector<int> used_fact_idx, used_rule_idx;

  std::vector<Formula> premises;
  for (std::size_t i = 0; i < kb.facts.size(); ++i)
    if (fact_used[i]) {
      premises.push_back(kb.fact_formula(kb.facts[i]));
      used_fact_idx.push_back(static_cast<int>(i));
    }
  for (std::size_t i = 0; i < kb.rules.size(); ++i)
    if (rule_used[i]) {
      premises.push_back(kb.rule_formula(kb.rules[i]));
      used_rule_idx.push_back(static_cast<int>(i));
    }
  Formula s_and = premises[0];
  for (std::size_t i = 1; i < premises.size(); ++i)
    s_and = Formula::mk_and(std::move(s_and), premises[i]);

  ProofBuilder b(p);
  using K = Justification::Kind;
  // current line proving S -> [g]x, per atom
  std::map<std::string, std::pair<std::size_t, GradeNF>> derived;

  auto premise_projection = [&](const Formula& prem) {
    return b.taut(Formula::mk_implies(s_and, prem));
  };

  for (const auto& ev : trace.events) {
    bool relevant = ev.from_rule ? rule_used[ev.source] != 0
                                 : fact_used[ev.source] != 0;
    if (!relevant)
      continue;
    std::size_t contrib_line;
    GradeExpr contrib_expr = to_expr(p, ev.contribution);
    if (!ev.from_rule) {
      const Fact& fact = kb.facts[ev.source];
      contrib_line = premise_projection(kb.fact_formula(fact));
      contrib_expr = fact.grade_expr;
    } else {
      const Rule& rule = kb.rules[ev.source];
      Formula rule_f = kb.rule_formula(rule);
      std::size_t rule_line = premise_projection(rule_f);
      // meet of the rule grade and the body grades, as fired
      GradeExpr c = rule.grade_expr;
      for (const auto& bg : ev.body_grades)
        c = GradeExpr::meet(std::move(c), to_expr(p, bg));
      contrib_expr = c;
      // weaken every body line and the rule itself to grade c
      std::vector<std::size_t> body_at_c;
      for (std::size_t bi = 0; bi < rule.body.size(); ++bi) {
        const auto& [line, grade] = derived.at(rule.body[bi]);
        const Formula have = b.lines()[line].formula; // S -> [g]b
        std::size_t w = b.weaken_theorem(have.rhs().grade(), c,
                                         have.rhs().child());
        body_at_c.push_back(b.syllogism(line, w));
      }
      std::size_t rule_at_c = rule_line;
      if (normalize(p, c) != rule.grade) {
        std::size_t w = b.weaken_theorem(rule.grade_expr, c, rule_f.child());
        rule_at_c = b.syllogism(rule_line, w);
      }
      // fold the body into one boxed conjunction
      std::size_t body_line = body_at_c[0];
      Formula body_f = Formula::mk_atom(rule.body[0]);
      for (std::size_t bi = 1; bi < rule.body.size(); ++bi) {
        Formula next = Formula::mk_atom(rule.body[bi]);
        std::size_t cj = detail::conj_theorem(b, p, c, body_f, next);
        body_line = b.glue2(body_line, body_at_c[bi], cj);
        body_f = Formula::mk_and(std::move(body_f), std::move(next));
      }
      // K: [c](body -> head) -> ([c]body -> [c]head)
      Formula head = Formula::mk_atom(rule.head);
      std::size_t k = b.add(
          Formula::mk_implies(
              Formula::mk_box(c, Formula::mk_implies(body_f, head)),
              Formula::mk_implies(Formula::mk_box(c, body_f),
                                  Formula::mk_box(c, head))),
          Justification::simple(K::K));
      std::size_t step = b.syllogism(rule_at_c, k); // S -> ([c]body -> [c]head)
      // S -> [c]body and S -> ([c]body -> [c]head) give S -> [c]head
      const Formula sp = b.lines()[body_line].formula;
      const Formula sq = b.lines()[step].formula;
      Formula goal = Formula::mk_implies(s_and, Formula::mk_box(c, head));
      std::size_t t = b.taut(Formula::mk_implies(
          sp, Formula::mk_implies(sq, goal)));
      std::size_t u = b.mp(body_line, t);
      contrib_line = b.add(goal, Justification::two(K::Mp,
                                                    static_cast<int>(step) + 1,
                                                    static_cast<int>(u) + 1));
    }
    auto cur = derived.find(ev.atom);
    if (cur == derived.end()) {
      derived.emplace(ev.atom, std::make_pair(contrib_line, ev.contribution));
      continue;
    }
    // join with the previous best grade via A1
    const auto& [prev_line, prev_grade] = cur->second;
    const Formula prev_box = b.lines()[prev_line].formula.rhs();
    const Formula contrib_box = b.lines()[contrib_line].formula.rhs();
    GradeExpr joined = GradeExpr::join(prev_box.grade(), contrib_box.grade());
    Formula body_atom = Formula::mk_atom(ev.atom);
    std::size_t a1 = b.add(
        Formula::mk_implies(Formula::mk_and(prev_box, contrib_box),
                            Formula::mk_box(joined, body_atom)),
        Justification::simple(K::A1));
    std::size_t line = b.glue2(prev_line, contrib_line, a1);
    cur->second = {line, grade_join(p, prev_grade, ev.contribution)};
  }

  auto final_it = derived.find(atom);
  if (final_it == derived.end() || final_it->second.second != best)
    throw Error("internal: trace replay disagrees with saturation");
  return QueryResult{std::move(best), Proof{p, std::move(b.lines())},
                     std::move(used_fact_idx), std::move(used_rule_idx)};
}

enum class Comparison { FirstHigher, SecondHigher, Equal, Incomparable };

inline Comparison compare(const KnowledgeBase& kb, const std::string& atom1,
                          const std::string& atom2) {
  GradeMap m = saturate(kb);
  auto find = [&](const std::string& a) -> const GradeNF& {
    auto it = m.find(a);
    if (it == m.end())
      throw Error("atom '" + a + "' is not derivable");
    return it->second;
  };
  const GradeNF& g1 = find(atom1);
  const GradeNF& g2 = find(atom2);
  bool le = grade_leq(kb.poset, g1, g2);
  bool ge = grade_leq(kb.poset, g2, g1);
  if (le && ge)
    return Comparison::Equal;
  if (ge)
    return Comparison::FirstHigher;
  if (le)
    return Comparison::SecondHigher;
  return Comparison::Incomparable;
}

} // namespace graded
