#include <doctest.h>

#include <random>

#include "graded/formula.hpp"

#include "support.hpp"

using namespace graded;

TEST_CASE("operator precedence and associativity") {
  GeneratorPoset p = support::weather_poset();
  auto rt = [&](const char* s) { return print_formula(parse_formula(s, p)); };

  // implication is right-associative and binds weaker than | and &
  CHECK(rt("a -> b -> c") == "a -> b -> c");
  CHECK(rt("(a -> b) -> c") == "(a -> b) -> c");
  CHECK(rt("a & b | c") == "a & b | c");
  CHECK(rt("a & (b | c)") == "a & (b | c)");
  CHECK(rt("!a & b") == "!a & b");
  CHECK(rt("!(a & b)") == "!(a & b)");
  CHECK(rt("a <-> b -> c") == "a <-> b -> c");

  // a box is a prefix operator: it grabs the smallest formula to its right
  Formula f = parse_formula("[alpha] a & b", p);
  CHECK(f.kind() == Formula::Kind::And);
  CHECK(f.lhs().kind() == Formula::Kind::Box);

  // grade expressions inside boxes
  Formula g = parse_formula("[alpha & (beta | gamma)] rain", p);
  CHECK(to_string(g.grade()) == "alpha & (beta | gamma)");

  CHECK(rt("true -> !false") == "true -> !false");
}

TEST_CASE("printer output reparses to the same formula") {
  std::mt19937_64 rng(20260823);
  GeneratorPoset p = support::weather_poset();
  std::vector<std::string> atoms{"a", "b", "c", "rain"};
  for (int i = 0; i < 500; ++i) {
    Formula f = support::random_formula(rng, p, atoms, 6);
    std::string once = print_formula(f);
    Formula back = parse_formula(once, p);
    CHECK(print_formula(back) == once);
    CHECK(equal_mod_grades(p, f, back));
  }
}

TEST_CASE("equality modulo grade equivalence") {
  GeneratorPoset p = support::weather_poset();
  // gamma <= alpha, so alpha & gamma collapses to gamma
  Formula a = parse_formula("[alpha & gamma] rain", p);
  Formula b = parse_formula("[gamma] rain", p);
  Formula c = parse_formula("[alpha] rain", p);
  CHECK(equal_mod_grades(p, a, b));
  CHECK_FALSE(equal_mod_grades(p, a, c));
  CHECK_FALSE(equal_mod_grades(p, a, parse_formula("[gamma] cold", p)));
}

TEST_CASE("formula parse errors") {
  GeneratorPoset p = support::weather_poset();
  CHECK_THROWS_AS(parse_formula("a ->", p), ParseError);
  CHECK_THROWS_AS(parse_formula("[alpha rain", p), ParseError);
  CHECK_THROWS_AS(parse_formula("(a & b", p), ParseError);
  CHECK_THROWS_AS(parse_formula("a b", p), ParseError);
  CHECK_THROWS_AS(parse_formula("[zeta] a", p), ValidationError);
}

TEST_CASE("analysis reports atoms, reserved use and modal depth") {
  GeneratorPoset p({"alpha", "alpha_prime", "beta", "gamma"}, "T",
                   {{"alpha", "alpha_prime"}});
  Formula s = parse_formula(
      "[alpha] ([beta] !tom_coming -> [gamma] !mary_coming) & "
      "[alpha_prime] [beta] !tom_coming",
      p);
  FormulaStats st = analyze(s);
  CHECK(st.modal_depth == 2);
  CHECK(st.atoms == std::set<std::string>{"tom_coming", "mary_coming"});
  CHECK_FALSE(st.uses_reserved);
  CHECK(analyze(parse_formula("[alpha] p0", p)).uses_reserved);
}
