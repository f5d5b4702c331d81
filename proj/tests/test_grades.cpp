#include <doctest.h>

#include <random>

#include "graded/grades.hpp"
#include "graded/io.hpp"
#include "graded/poset.hpp"

#include "support.hpp"

using namespace graded;

TEST_CASE("poset file parsing and closure") {
  GeneratorPoset p = load_poset(support::data_dir() / "weather.poset");
  CHECK(p.size() == 5);
  CHECK(p.leq("gamma", "alpha"));
  CHECK(p.leq("gamma", "delta"));
  CHECK(p.leq("beta", "delta"));
  CHECK(p.leq("beta", "T"));
  CHECK_FALSE(p.leq("alpha", "beta"));
  CHECK_FALSE(p.leq("delta", "gamma"));
  CHECK(p == support::weather_poset());
}

TEST_CASE("poset rejects cycles and bad files") {
  CHECK_THROWS_AS(GeneratorPoset({"a", "b"}, "T", {{"a", "b"}, {"b", "a"}}),
                  ValidationError);
  CHECK_THROWS_AS(GeneratorPoset::parse("generators: a b\norder:\na < b\n"),
                  ParseError); // missing top
  CHECK_THROWS_AS(GeneratorPoset::parse("generators: a\ntop: T\norder:\na < q\n"),
                  ParseError); // undeclared generator
  CHECK_THROWS_AS(GeneratorPoset({"a", "a"}, "T", {}), ValidationError);
}

TEST_CASE("normal forms match hand calculations") {
  GeneratorPoset p = support::weather_poset();
  auto nf = [&](const char* s) { return normalize(p, parse_grade_expr(s, p)); };
  auto str = [&](const char* s) { return to_string(p, nf(s)); };

  // gamma sits below alpha & delta, so the join collapses
  CHECK(str("gamma | (alpha & delta)") == "alpha & delta");
  CHECK(str("gamma & (alpha & delta)") == "gamma");
  // distributivity
  CHECK(nf("alpha & (beta | gamma)") == nf("(alpha & beta) | (alpha & gamma)"));
  // absorption and idempotence
  CHECK(str("alpha & (alpha | beta)") == "alpha");
  CHECK(str("alpha | (alpha & beta)") == "alpha");
  CHECK(str("beta & beta") == "beta");
  // top absorbs meets and dominates joins
  CHECK(str("T & beta") == "beta");
  CHECK(str("T | beta") == "T");
  // Example 2's identity
  CHECK(nf("(alpha & gamma) | (beta & gamma)") == nf("(alpha | beta) & gamma"));
}

TEST_CASE("grade order agrees with the valuation oracle") {
  GeneratorPoset p = support::weather_poset();
  CHECK(grade_leq(p, normalize(p, parse_grade_expr("gamma", p)),
                  normalize(p, parse_grade_expr("alpha & delta", p))));

  std::mt19937_64 rng(20260823);
  for (int i = 0; i < 2000; ++i) {
    GradeExpr a = support::random_grade(rng, p, 3);
    GradeExpr b = support::random_grade(rng, p, 3);
    bool via_nf = grade_leq(p, normalize(p, a), normalize(p, b));
    bool via_oracle = oracle_leq(p, a, b);
    REQUIRE_MESSAGE(via_nf == via_oracle,
                    to_string(a) << " vs " << to_string(b));
  }
}

TEST_CASE("meet and join are lattice operations") {
  std::mt19937_64 rng(7);
  GeneratorPoset p = support::random_poset(rng, 4);
  for (int i = 0; i < 300; ++i) {
    GradeNF a = normalize(p, support::random_grade(rng, p, 3));
    GradeNF b = normalize(p, support::random_grade(rng, p, 3));
    GradeNF m = grade_meet(p, a, b);
    GradeNF j = grade_join(p, a, b);
    CHECK(grade_leq(p, m, a));
    CHECK(grade_leq(p, m, b));
    CHECK(grade_leq(p, a, j));
    CHECK(grade_leq(p, b, j));
    // glb / lub: any other bound factors through
    GradeNF c = normalize(p, support::random_grade(rng, p, 2));
    if (grade_leq(p, c, a) && grade_leq(p, c, b))
      CHECK(grade_leq(p, c, m));
    if (grade_leq(p, a, c) && grade_leq(p, b, c))
      CHECK(grade_leq(p, j, c));
  }
}

TEST_CASE("normal form round-trips through to_expr") {
  std::mt19937_64 rng(11);
  GeneratorPoset p = support::weather_poset();
  for (int i = 0; i < 500; ++i) {
    GradeNF nf = normalize(p, support::random_grade(rng, p, 4));
    CHECK(normalize(p, to_expr(p, nf)) == nf);
    CHECK(normalize(p, parse_grade_expr(to_string(p, nf), p)) == nf);
  }
}

TEST_CASE("lattice enumeration") {
  GeneratorPoset flat2({"a", "b"}, "T", {});
  LatticeEnumeration small = enumerate_lattice(flat2);
  // a, b, a&b, a|b, T
  CHECK(small.elements.size() == 5);

  GeneratorPoset p = support::weather_poset();
  LatticeEnumeration lat = enumerate_lattice(p);
  CHECK(lat.elements.size() == 13);
  // cover edges are irredundant: both ends comparable, nothing in between
  for (auto [lo, hi] : lat.cover_edges) {
    CHECK(grade_leq(p, lat.elements[lo], lat.elements[hi]));
    CHECK_FALSE(grade_leq(p, lat.elements[hi], lat.elements[lo]));
  }
}

TEST_CASE("grade expression parse errors") {
  GeneratorPoset p = support::weather_poset();
  CHECK_THROWS_AS(parse_grade_expr("alpha &", p), ParseError);
  CHECK_THROWS_AS(parse_grade_expr("epsilon", p), ValidationError);
  CHECK_THROWS_AS(parse_grade_expr("(alpha | beta", p), ParseError);
  CHECK_THROWS_AS(parse_grade_expr("alpha beta", p), ParseError);
}
