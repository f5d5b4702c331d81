#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "graded/formula.hpp"
#include "graded/grades.hpp"
#include "graded/poset.hpp"
#include "graded/proof.hpp"

namespace support {

inline std::filesystem::path data_dir() { return DATA_DIR; }

inline graded::GeneratorPoset weather_poset() {
  return graded::GeneratorPoset(
      {"alpha", "beta", "gamma", "delta"}, "T",
      {{"gamma", "alpha"}, {"gamma", "delta"}, {"beta", "delta"}});
}

// Random poset over k named generators plus top: edges drawn from a fixed
// linear order of the names, which keeps the relation acyclic.
inline graded::GeneratorPoset random_poset(std::mt19937_64& rng, int k,
                                           int edge_percent = 30) {
  std::vector<std::string> gens;
  for (int i = 0; i < k; ++i)
    gens.push_back("g" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (static_cast<int>(rng() % 100) < edge_percent)
        edges.emplace_back(gens[i], gens[j]);
  return graded::GeneratorPoset(gens, "T", edges);
}

inline graded::GradeExpr random_grade(std::mt19937_64& rng,
                                      const graded::GeneratorPoset& p,
                                      int depth) {
  if (depth <= 0 || rng() % 3 == 0)
    return graded::GradeExpr::leaf(p.generators()[rng() % p.generators().size()]);
  graded::GradeExpr a = random_grade(rng, p, depth - 1);
  graded::GradeExpr b = random_grade(rng, p, depth - 1);
  return rng() % 2 ? graded::GradeExpr::meet(std::move(a), std::move(b))
                   : graded::GradeExpr::join(std::move(a), std::move(b));
}

inline graded::Formula random_formula(std::mt19937_64& rng,
                                      const graded::GeneratorPoset& p,
                                      const std::vector<std::string>& atoms,
                                      int depth) {
  using F = graded::Formula;
  if (depth <= 0 || rng() % 4 == 0) {
    switch (rng() % 6) {
    case 0:
      return F::mk_true();
    case 1:
      return F::mk_false();
    default:
      return F::mk_atom(atoms[rng() % atoms.size()]);
    }
  }
  switch (rng() % 6) {
  case 0:
    return F::mk_not(random_formula(rng, p, atoms, depth - 1));
  case 1:
    return F::mk_box(random_grade(rng, p, 2),
                     random_formula(rng, p, atoms, depth - 1));
  case 2:
    return F::mk_and(random_formula(rng, p, atoms, depth - 1),
                     random_formula(rng, p, atoms, depth - 1));
  case 3:
    return F::mk_or(random_formula(rng, p, atoms, depth - 1),
                    random_formula(rng, p, atoms, depth - 1));
  case 4:
    return F::mk_implies(random_formula(rng, p, atoms, depth - 1),
                         random_formula(rng, p, atoms, depth - 1));
  default:
    return F::mk_iff(random_formula(rng, p, atoms, depth - 1),
                     random_formula(rng, p, atoms, depth - 1));
  }
}

// Random accepted proof: starts from constructions known to check (order
// theorems, necessitated tautologies) and extends them with gen / weaken /
// modus ponens steps chosen at random.
inline graded::Proof random_accepted_proof(std::mt19937_64& rng,
                                           const graded::GeneratorPoset& p,
                                           const std::vector<std::string>& atoms) {
  using F = graded::Formula;
  graded::ProofBuilder b(p);

  graded::GradeExpr e1 = random_grade(rng, p, 2);
  graded::GradeExpr e2 = random_grade(rng, p, 2);
  graded::GradeNF upper = graded::normalize(p, e1);
  graded::GradeNF lower = graded::grade_meet(p, upper, graded::normalize(p, e2));
  std::size_t ord = b.order_theorem(lower, upper);

  F body = random_formula(rng, p, atoms, 2);
  std::size_t last = ord;
  switch (rng() % 4) {
  case 0: { // transfer the order theorem to an arbitrary body
    F want = F::mk_implies(
        F::mk_box(graded::to_expr(p, upper), body),
        F::mk_box(graded::to_expr(p, lower), body));
    last = b.add(std::move(want),
                 graded::Justification::one(graded::Justification::Kind::Gen,
                                            static_cast<int>(ord) + 1));
    break;
  }
  case 1: { // necessitation of a tautology, then weakening
    F t = F::mk_implies(body, body);
    std::size_t taut = b.taut(t);
    std::size_t nec = b.add(
        F::mk_box(graded::GradeExpr::leaf(p.top()), t),
        graded::Justification::one(graded::Justification::Kind::Nec,
                                   static_cast<int>(taut) + 1));
    graded::GradeExpr down = random_grade(rng, p, 2);
    std::size_t w =
        b.weaken_theorem(graded::GradeExpr::leaf(p.top()), down, t);
    last = b.mp(nec, w);
    break;
  }
  case 2: { // propositional detour: X, X -> (Y -> X), hence Y -> X
    const F x = b.lines()[ord].formula;
    F y = random_formula(rng, p, atoms, 2);
    std::size_t t = b.taut(F::mk_implies(x, F::mk_implies(y, x)));
    last = b.mp(ord, t);
    break;
  }
  default: // plain order theorem
    break;
  }
  (void)last;
  return graded::Proof{p, std::move(b.lines())};
}

} // namespace support
