#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graded/engine.hpp"
#include "graded/formula.hpp"
#include "graded/grades.hpp"
#include "graded/io.hpp"
#include "graded/kripke.hpp"
#include "graded/poset.hpp"
#include "graded/proof.hpp"

namespace {

constexpr int kOk = 0;      // success / accept / true
constexpr int kReject = 1;  // reject / false / countermodel found
constexpr int kUsage = 2;   // usage or parse errors

// Bad names inside a command-line expression are usage errors, not verdicts.
graded::GradeExpr arg_grade(const std::string& text,
                            const graded::GeneratorPoset& p) {
  try {
    return graded::parse_grade_expr(text, p);
  } catch (const graded::ValidationError& e) {
    throw graded::ParseError(e.what());
  }
}

graded::Formula arg_formula(const std::string& text,
                            const graded::GeneratorPoset& p) {
  try {
    return graded::parse_formula(text, p);
  } catch (const graded::ValidationError& e) {
    throw graded::ParseError(e.what());
  }
}

int cmd_order(const std::string& poset_path, const std::string& e1,
              const std::string& e2) {
  graded::GeneratorPoset p = graded::load_poset(poset_path);
  graded::GradeNF a = graded::normalize(p, arg_grade(e1, p));
  graded::GradeNF b = graded::normalize(p, arg_grade(e2, p));
  bool leq = graded::grade_leq(p, a, b);
  std::cout << (leq ? "true" : "false") << '\n';
  return leq ? kOk : kReject;
}

int cmd_normalize(const std::string& poset_path, const std::string& expr) {
  graded::GeneratorPoset p = graded::load_poset(poset_path);
  graded::GradeNF nf = graded::normalize(p, arg_grade(expr, p));
  std::cout << "normal-form: " << graded::to_string(p, nf) << '\n';
  return kOk;
}

int cmd_enumerate(const std::string& poset_path) {
  graded::GeneratorPoset p = graded::load_poset(poset_path);
  graded::LatticeEnumeration lat = graded::enumerate_lattice(p);
  std::vector<std::string> names;
  names.reserve(lat.elements.size());
  for (const auto& e : lat.elements)
    names.push_back(graded::to_string(p, e));
  std::cout << "elements: " << names.size() << '\n';
  for (const auto& n : names)
    std::cout << "element: " << n << '\n';
  for (const auto& [lo, hi] : lat.cover_edges)
    std::cout << "cover: " << names[lo] << " < " << names[hi] << '\n';
  return kOk;
}

int cmd_check_model(const std::string& interp_path,
                    const std::string& formula_text) {
  graded::Interpretation m = graded::load_interpretation(interp_path);
  std::cout << "worlds: " << m.world_count() << '\n';
  if (formula_text.empty()) {
    std::cout << "interpretation: valid" << '\n';
    return kOk;
  }
  graded::Formula f = arg_formula(formula_text, m.poset());
  auto bad = m.failing_world(f);
  if (!bad) {
    std::cout << "formula: true-in-all-worlds" << '\n';
    return kOk;
  }
  std::cout << "formula: false" << '\n';
  std::cout << "failing-world: " << *bad << '\n';
  return kReject;
}

int cmd_check_proof(const std::string& proof_path) {
  graded::Proof pr = graded::load_proof(proof_path);
  graded::CheckResult res = graded::check_proof(pr);
  if (res.accepted) {
    std::cout << "proof: accepted" << '\n';
    std::cout << "conclusion: " << graded::print_formula(pr.conclusion())
              << '\n';
    return kOk;
  }
  std::cout << "proof: rejected" << '\n';
  for (const auto& d : res.diagnostics)
    std::cout << "reason: " << d << '\n';
  return kReject;
}

int cmd_saturate(const std::string& kb_path) {
  graded::KnowledgeBase kb = graded::load_kb(kb_path);
  graded::GradeMap m = graded::saturate(kb);
  for (const auto& [atom, nf] : m)  // std::map: lexicographic atom order
    std::cout << atom << ": " << graded::to_string(kb.poset, nf) << '\n';
  return kOk;
}

int cmd_query(const std::string& kb_path, const std::string& atom,
              const std::string& trace_out) {
  namespace fs = std::filesystem;
  graded::RawKnowledgeBase raw =
      graded::parse_kb_text(graded::read_file(kb_path));
  if (!raw.poset_path)
    throw graded::ParseError("kb file " + kb_path + ": missing 'poset:' line");
  fs::path poset_file = graded::resolve_sibling(kb_path, *raw.poset_path);
  graded::KnowledgeBase kb =
      graded::make_kb(raw, graded::load_poset(poset_file));

  graded::QueryResult res = graded::query(kb, atom);
  std::cout << atom << ": " << graded::to_string(kb.poset, res.grade) << '\n';
  for (int i : res.used_facts)
    std::cout << "used-fact: "
              << graded::print_formula(kb.fact_formula(kb.facts[i])) << '\n';
  for (int i : res.used_rules)
    std::cout << "used-rule: "
              << graded::print_formula(kb.rule_formula(kb.rules[i])) << '\n';
  if (!trace_out.empty()) {
    std::ofstream out(trace_out);
    if (!out)
      throw graded::Error("cannot write trace file: " + trace_out);
    out << graded::proof_to_text(res.trace,
                                 fs::absolute(poset_file).string());
    std::cout << "trace: " << trace_out << '\n';
  }
  return kOk;
}

int cmd_countermodel(const std::string& poset_path,
                     const std::string& formula_text, int worlds,
                     std::uint64_t seed, bool seed_given) {
  graded::GeneratorPoset p = graded::load_poset(poset_path);
  graded::Formula f = arg_formula(formula_text, p);
  auto stats = graded::analyze(f);
  bool exhaustive = !seed_given && worlds <= 3 && p.size() <= 5 &&
                    stats.atoms.size() <= 3;
  graded::Verdict v = graded::find_countermodel(
      f, p, worlds,
      exhaustive ? graded::SearchMode::Exhaustive
                 : graded::SearchMode::Randomized,
      seed);
  std::cout << "search: " << (exhaustive ? "exhaustive" : "randomized")
            << '\n';
  std::cout << "models-checked: " << v.models_checked << '\n';
  if (!v.found()) {
    std::cout << "countermodel: none" << '\n';
    return kOk;
  }
  std::cout << "countermodel: found" << '\n';
  std::cout << "witness-world: " << v.witness_world << '\n';
  std::cout << v.countermodel->to_text();
  return kReject;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice-graded modal logic toolkit"};
  app.require_subcommand(1);

  std::string poset_path, expr1, expr2, interp_path, formula_text;
  std::string proof_path, kb_path, atom, trace_out;
  int worlds = 2;
  std::uint64_t seed = 0;

  auto* order = app.add_subcommand("order", "decide e1 <= e2 in the lattice");
  order->add_option("poset", poset_path)->required();
  order->add_option("expr1", expr1)->required();
  order->add_option("expr2", expr2)->required();

  auto* normalize = app.add_subcommand("normalize", "canonical normal form");
  normalize->add_option("poset", poset_path)->required();
  normalize->add_option("expr", expr1)->required();

  auto* enumerate = app.add_subcommand("enumerate",
                                       "list the generated lattice");
  enumerate->add_option("poset", poset_path)->required();

  auto* check_model = app.add_subcommand(
      "check-model", "validate an interpretation; optionally evaluate a formula");
  check_model->add_option("interpretation", interp_path)->required();
  check_model->add_option("formula", formula_text);

  auto* check_proof = app.add_subcommand("check-proof", "verify a proof file");
  check_proof->add_option("proof", proof_path)->required();

  auto* saturate = app.add_subcommand("saturate",
                                      "best grade for every atom of a kb");
  saturate->add_option("kb", kb_path)->required();

  auto* query = app.add_subcommand("query", "best grade for one atom");
  query->add_option("kb", kb_path)->required();
  query->add_option("atom", atom)->required();
  query->add_option("--trace", trace_out, "write a checkable proof trace");

  auto* countermodel =
      app.add_subcommand("countermodel", "search for a falsifying model");
  countermodel->add_option("poset", poset_path)->required();
  countermodel->add_option("formula", formula_text)->required();
  countermodel->add_option("--worlds", worlds, "world bound")->required();
  auto* seed_opt =
      countermodel->add_option("--seed", seed, "randomized search seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*order)
      return cmd_order(poset_path, expr1, expr2);
    if (*normalize)
      return cmd_normalize(poset_path, expr1);
    if (*enumerate)
      return cmd_enumerate(poset_path);
    if (*check_model)
      return cmd_check_model(interp_path, formula_text);
    if (*check_proof)
      return cmd_check_proof(proof_path);
    if (*saturate)
      return cmd_saturate(kb_path);
    if (*query)
      return cmd_query(kb_path, atom, trace_out);
    if (*countermodel)
      return cmd_countermodel(poset_path, formula_text, worlds, seed,
                              seed_opt->count() > 0);
  } catch (const graded::ValidationError& e) {
    std::cout << "invalid: " << e.what() << '\n';
    return kReject;
  } catch (const graded::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
