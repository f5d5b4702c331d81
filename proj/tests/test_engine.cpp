#include <doctest.h>

#include <algorithm>
#include <random>

#include "graded/engine.hpp"
#include "graded/io.hpp"

#include "support.hpp"

using namespace graded;

namespace {

std::string grade_of(const KnowledgeBase& kb, const GradeMap& m,
                     const std::string& atom) {
  auto it = m.find(atom);
  REQUIRE(it != m.end());
  return to_string(kb.poset, it->second);
}

} // namespace

TEST_CASE("cold-and-rain knowledge base") {
  KnowledgeBase kb = load_kb(support::data_dir() / "example1.kb");
  GradeMap m = saturate(kb);
  CHECK(grade_of(kb, m, "cold") == "alpha");
  CHECK(grade_of(kb, m, "rain") == "beta");
  CHECK(grade_of(kb, m, "ill") == "(alpha & gamma) | (beta & delta)");
}

TEST_CASE("two reasons for cold combine through the join") {
  KnowledgeBase kb = load_kb(support::data_dir() / "example2.kb");
  GradeMap m = saturate(kb);
  CHECK(grade_of(kb, m, "cold") == "alpha | beta");
  // (alpha & gamma) | (beta & gamma) and (alpha | beta) & gamma coincide
  CHECK(m.at("ill") ==
        normalize(kb.poset,
                  parse_grade_expr("(alpha & gamma) | (beta & gamma)", kb.poset)));
  CHECK(m.at("ill") ==
        normalize(kb.poset,
                  parse_grade_expr("(alpha | beta) & gamma", kb.poset)));
}

TEST_CASE("theater knowledge base and grade comparison") {
  KnowledgeBase kb = load_kb(support::data_dir() / "example3.kb");
  GradeMap m = saturate(kb);
  CHECK(grade_of(kb, m, "late") == "alpha & beta");
  CHECK(grade_of(kb, m, "restaurant") == "gamma & delta");
  // delta & gamma <= alpha & beta: more confidence in arriving late
  CHECK(compare(kb, "late", "restaurant") == Comparison::FirstHigher);
  CHECK(compare(kb, "restaurant", "late") == Comparison::SecondHigher);
  CHECK(compare(kb, "late", "late") == Comparison::Equal);
  CHECK(compare(kb, "traffic_jams", "finish_early") == Comparison::Incomparable);
}

TEST_CASE("query returns a checkable trace with the saturation grade") {
  for (const char* name : {"example1.kb", "example2.kb", "example3.kb"}) {
    KnowledgeBase kb = load_kb(support::data_dir() / name);
    GradeMap m = saturate(kb);
    for (const auto& [atom, grade] : m) {
      QueryResult q = query(kb, atom);
      CHECK(q.grade == grade);
      CheckResult res = check_proof(q.trace);
      REQUIRE_MESSAGE(res.accepted,
                      name << "/" << atom << ": "
                           << (res.diagnostics.empty() ? ""
                                                       : res.diagnostics[0]));
      // conclusion: (cited premises conjunction) -> [grade]atom
      const Formula& c = q.trace.conclusion();
      REQUIRE(c.kind() == Formula::Kind::Implies);
      REQUIRE(c.rhs().kind() == Formula::Kind::Box);
      CHECK(normalize(kb.poset, c.rhs().grade()) == grade);
      CHECK(c.rhs().child().atom() == atom);
    }
  }
}

TEST_CASE("saturation is monotone in the knowledge base") {
  KnowledgeBase kb = load_kb(support::data_dir() / "example1.kb");
  GradeMap before = saturate(kb);
  KnowledgeBase extended = kb;
  extended.facts.push_back(
      Fact{parse_grade_expr("delta", kb.poset),
           normalize(kb.poset, parse_grade_expr("delta", kb.poset)), "cold"});
  GradeMap after = saturate(extended);
  for (const auto& [atom, grade] : before)
    CHECK(grade_leq(kb.poset, grade, after.at(atom)));
  // the new evidence strictly improves cold
  CHECK(grade_of(extended, after, "cold") == "alpha | delta");
}

TEST_CASE("saturation does not depend on assertion order") {
  std::mt19937_64 rng(13);
  RawKnowledgeBase raw =
      parse_kb_text(read_file(support::data_dir() / "example1.kb"));
  GeneratorPoset p = load_poset(support::data_dir() / "example1.poset");
  GradeMap reference = saturate(make_kb(raw, p));
  for (int i = 0; i < 10; ++i) {
    std::shuffle(raw.assertions.begin(), raw.assertions.end(), rng);
    CHECK(saturate(make_kb(raw, p)) == reference);
  }
}

TEST_CASE("knowledge bases outside the Horn fragment are rejected") {
  GeneratorPoset p = support::weather_poset();
  auto bad = [&](const char* assertion) {
    RawKnowledgeBase raw;
    raw.assertions.push_back(assertion);
    CHECK_THROWS_AS(make_kb(raw, p), ValidationError);
  };
  bad("cold");                       // no grade
  bad("[alpha] !cold");              // negation
  bad("[alpha] (cold | rain)");      // disjunction head
  bad("[alpha] (cold -> !ill)");     // non-atomic head
  bad("[alpha] p0");                 // reserved atom
  bad("[alpha] (cold & cold -> ill)"); // duplicate body atom
  bad("[alpha] [beta] cold");        // nested modality
}

TEST_CASE("querying an underivable atom fails loudly") {
  KnowledgeBase kb = load_kb(support::data_dir() / "example3.kb");
  CHECK_THROWS_AS(query(kb, "theater"), Error);
}

TEST_CASE("rule chains combine grades through meets") {
  GeneratorPoset p = support::weather_poset();
  RawKnowledgeBase raw;
  raw.assertions = {"[alpha] a", "[delta] b", "[T] (a & b -> c)",
                    "[beta] (c -> d)"};
  KnowledgeBase kb = make_kb(raw, p);
  GradeMap m = saturate(kb);
  CHECK(m.at("c") == normalize(p, parse_grade_expr("alpha & delta", p)));
  CHECK(m.at("d") ==
        normalize(p, parse_grade_expr("alpha & delta & beta", p)));
  QueryResult q = query(kb, "d");
  CHECK(check_proof(q.trace).accepted);
  CHECK(q.used_facts.size() == 2);
  CHECK(q.used_rules.size() == 2);
}
