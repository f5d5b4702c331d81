#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graded/error.hpp"
#include "graded/formula.hpp"
#include "graded/grades.hpp"
#include "graded/poset.hpp"

namespace graded {

// Finite graded interpretation: worlds, one accessibility relation per
// generator (relations for compound grades are always derived), and a sparse
// valuation (atoms absent from the map are false everywhere).
//
// Relations are stored as per-world successor bitmasks, which bounds models
// at 64 worlds.
class Interpretation {
public:
  static constexpr int kMaxWorlds = 64;

  static Interpretation make(
      GeneratorPoset poset, std::vector<std::string> worlds,
      const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& rels,
      const std::map<std::string, std::vector<std::string>>& valuation) {
    Interpretation I(std::move(poset), std::move(worlds));
    for (const auto& [gen, pairs] : rels) {
      int gi = I.poset_.index_of(gen);
      for (const auto& [from, to] : pairs)
        I.rel_[gi][I.world_index(from)] |= bit(I.world_index(to));
    }
    for (const auto& [atom, where] : valuation) {
      if (!is_identifier(atom))
        throw ValidationError("invalid atom '" + atom + "'");
      std::uint64_t mask = 0;
      for (const auto& w : where)
        mask |= bit(I.world_index(w));
      I.val_[atom] = mask;
    }
    I.validate();
    return I;
  }

  // For generated models whose invariants hold by construction.
  static Interpretation unchecked(GeneratorPoset poset,
                                  std::vector<std::string> worlds,
                                  std::vector<std::vector<std::uint64_t>> rel,
                                  std::map<std::string, std::uint64_t> val) {
    Interpretation I(std::move(poset), std::move(worlds));
    I.rel_ = std::move(rel);
    I.val_ = std::move(val);
    return I;
  }

  const GeneratorPoset& poset() const { return poset_; }
  const std::vector<std::string>& worlds() const { return worlds_; }
  int world_count() const { return static_cast<int>(worlds_.size()); }

  int world_index(std::string_view w) const {
    for (std::size_t i = 0; i < worlds_.size(); ++i)
      if (worlds_[i] == w)
        return static_cast<int>(i);
    throw ValidationError("undeclared world '" + std::string(w) + "'");
  }

  // monotonicity, seriality of the top relation
  void validate() const {
    const int n = poset_.size();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b || !poset_.leq(a, b))
          continue;
        for (int w = 0; w < world_count(); ++w) {
          std::uint64_t extra = rel_[a][w] & ~rel_[b][w];
          if (extra) {
            int wp = first_bit(extra);
            throw ValidationError(
                "monotonicity violation: " + poset_.name(a) + " <= " +
                poset_.name(b) + " but edge " + worlds_[w] + "->" + worlds_[wp] +
                " is in R_" + poset_.name(a) + " and not in R_" + poset_.name(b));
          }
        }
      }
    const int t = poset_.top_index();
    for (int w = 0; w < world_count(); ++w)
      if (rel_[t][w] == 0)
        throw ValidationError("seriality violation: world '" + worlds_[w] +
                              "' has no " + poset_.top() + "-successor");
  }

  std::uint64_t successors(const GradeExpr& e, int w) const {
    switch (e.kind) {
    case GradeExpr::Kind::Leaf:
      return rel_[poset_.index_of(e.id)][w];
    case GradeExpr::Kind::Meet:
      return successors(e.kids[0], w) & successors(e.kids[1], w);
    case GradeExpr::Kind::Join:
      return successors(e.kids[0], w) | successors(e.kids[1], w);
    }
    return 0;
  }

  // union over joins, intersection over meets, generator relations at leaves
  std::vector<std::pair<std::string, std::string>> derive_relation(
      const GradeExpr& e) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (int w = 0; w < world_count(); ++w) {
      std::uint64_t m = successors(e, w);
      for (int v = 0; v < world_count(); ++v)
        if (m & bit(v))
          out.emplace_back(worlds_[w], worlds_[v]);
    }
    return out;
  }

  bool satisfies(int w, const Formula& f) const {
    switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = val_.find(f.atom());
      return it != val_.end() && (it->second & bit(w));
    }
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Not:
      return !satisfies(w, f.child());
    case Formula::Kind::And:
      return satisfies(w, f.lhs()) && satisfies(w, f.rhs());
    case Formula::Kind::Or:
      return satisfies(w, f.lhs()) || satisfies(w, f.rhs());
    case Formula::Kind::Implies:
      return !satisfies(w, f.lhs()) || satisfies(w, f.rhs());
    case Formula::Kind::Iff:
      return satisfies(w, f.lhs()) == satisfies(w, f.rhs());
    case Formula::Kind::Box: {
      std::uint64_t m = successors(f.grade(), w);
      for (int v = 0; v < world_count(); ++v)
        if ((m & bit(v)) && !satisfies(v, f.child()))
          return false;
      return true;
    }
    }
    return false;
  }

  bool satisfies(std::string_view w, const Formula& f) const {
    return satisfies(world_index(w), f);
  }

  // empty optional: valid at every world; otherwise a failing world
  std::optional<std::string> failing_world(const Formula& f) const {
    for (int w = 0; w < world_count(); ++w)
      if (!satisfies(w, f))
        return worlds_[w];
    return std::nullopt;
  }

  bool valid_in(const Formula& f) const { return !failing_world(f).has_value(); }

  std::string to_text() const {
    std::ostringstream out;
    out << "worlds:";
    for (const auto& w : worlds_)
      out << ' ' << w;
    out << '\n';
    for (int g = 0; g < poset_.size(); ++g) {
      out << "rel " << poset_.name(g) << ":";
      for (int w = 0; w < world_count(); ++w)
        for (int v = 0; v < world_count(); ++v)
          if (rel_[g][w] & bit(v))
            out << ' ' << worlds_[w] << "->" << worlds_[v];
      out << '\n';
    }
    for (const auto& [atom, mask] : val_) {
      out << "val " << atom << ":";
      for (int w = 0; w < world_count(); ++w)
        if (mask & bit(w))
          out << ' ' << worlds_[w];
      out << '\n';
    }
    return out.str();
  }

private:
  Interpretation(GeneratorPoset poset, std::vector<std::string> worlds)
      : poset_(std::move(poset)), worlds_(std::move(worlds)) {
    if (worlds_.empty())
      throw ValidationError("interpretation needs at least one world");
    if (world_count() > kMaxWorlds)
      throw ValidationError("too many worlds");
    for (std::size_t i = 0; i < worlds_.size(); ++i) {
      if (!is_identifier(worlds_[i]))
        throw ValidationError("invalid world id '" + worlds_[i] + "'");
      for (std::size_t j = i + 1; j < worlds_.size(); ++j)
        if (worlds_[i] == worlds_[j])
          throw ValidationError("duplicate world '" + worlds_[i] + "'");
    }
    rel_.assign(poset_.size(), std::vector<std::uint64_t>(worlds_.size(), 0));
  }

  static std::uint64_t bit(int i) { return std::uint64_t{1} << i; }
  static int first_bit(std::uint64_t m) {
    int i = 0;
    while (!(m & 1)) {
      m >>= 1;
      ++i;
    }
    return i;
  }

  GeneratorPoset poset_;
  std::vector<std::string> worlds_;
  std::vector<std::vector<std::uint64_t>> rel_; // [generator][world] -> successor mask
  std::map<std::string, std::uint64_t> val_;    // atom -> worlds where true
};

// Interpretation file body (the 'poset:' line, if any, is resolved by the
// caller): 'worlds: <id>+', 'rel <gen>: <w>-><w> ...', 'val <atom>: <w> ...'.
struct RawInterpretation {
  std::optional<std::string> poset_path;
  std::vector<std::string> worlds;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> rels;
  std::map<std::string, std::vector<std::string>> valuation;
};

inline RawInterpretation parse_interpretation_text(std::string_view text) {
  RawInterpretation raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos)
      line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok))
      continue;
    auto fail = [&](const std::string& msg) -> ParseError {
      return ParseError("interpretation line " + std::to_string(lineno) + ": " + msg);
    };
    if (tok == "poset:") {
      std::string path;
      if (!(ls >> path))
        throw fail("expected path");
      raw.poset_path = path;
    } else if (tok == "worlds:") {
      std::string w;
      while (ls >> w)
        raw.worlds.push_back(w);
    } else if (tok == "rel") {
      std::string gen;
      if (!(ls >> gen) || gen.empty() || gen.back() != ':')
        throw fail("expected 'rel <generator>:'");
      gen.pop_back();
      std::string edge;
      while (ls >> edge) {
        auto arrow = edge.find("->");
        if (arrow == std::string::npos)
          throw fail("expected '<w>-><w>' edge, got '" + edge + "'");
        raw.rels[gen].emplace_back(edge.substr(0, arrow), edge.substr(arrow + 2));
      }
    } else if (tok == "val") {
      std::string atom;
      if (!(ls >> atom) || atom.empty() || atom.back() != ':')
        throw fail("expected 'val <atom>:'");
      atom.pop_back();
      std::string w;
      while (ls >> w)
        raw.valuation[atom].push_back(w);
    } else {
      throw fail("unexpected token '" + tok + "'");
    }
  }
  return raw;
}

inline Interpretation validate_interpretation(const RawInterpretation& raw,
                                              const GeneratorPoset& p) {
  return Interpretation::make(p, raw.worlds, raw.rels, raw.valuation);
}

enum class SearchMode { Exhaustive, Randomized };

struct Verdict {
  std::optional<Interpretation> countermodel;
  std::string witness_world;
  int worlds_searched = 0;       // largest world count tried
  std::uint64_t models_checked = 0;

  bool found() const { return countermodel.has_value(); }
};

namespace detail {

struct SearchContext {
  const GeneratorPoset& poset;
  const Formula& formula;
  std::vector<int> order;          // linear extension, top last
  std::vector<std::vector<int>> lower; // per generator: strictly lower generators
  std::vector<std::string> atoms;
  int n = 0;                       // world count
  std::vector<std::uint64_t> rel;  // [generator] -> n*n bitmask (pair w*n+v)
  std::uint64_t full = 0;
  Verdict* verdict = nullptr;

  bool eval(const Formula& f, int w, const std::map<std::string, std::uint64_t>& val,
            const std::vector<std::uint64_t>& rels) const {
    switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = val.find(f.atom());
      return it != val.end() && (it->second >> w) & 1;
    }
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Not:
      return !eval(f.child(), w, val, rels);
    case Formula::Kind::And:
      return eval(f.lhs(), w, val, rels) && eval(f.rhs(), w, val, rels);
    case Formula::Kind::Or:
      return eval(f.lhs(), w, val, rels) || eval(f.rhs(), w, val, rels);
    case Formula::Kind::Implies:
      return !eval(f.lhs(), w, val, rels) || eval(f.rhs(), w, val, rels);
    case Formula::Kind::Iff:
      return eval(f.lhs(), w, val, rels) == eval(f.rhs(), w, val, rels);
    case Formula::Kind::Box: {
      std::uint64_t m = grade_mask(f.grade(), rels) >> (w * n);
      for (int v = 0; v < n; ++v)
        if (((m >> v) & 1) && !eval(f.child(), v, val, rels))
          return false;
      return true;
    }
    }
    return false;
  }

  std::uint64_t grade_mask(const GradeExpr& e,
                           const std::vector<std::uint64_t>& rels) const {
    switch (e.kind) {
    case GradeExpr::Kind::Leaf:
      return rels[poset.index_of(e.id)];
    case GradeExpr::Kind::Meet:
      return grade_mask(e.kids[0], rels) & grade_mask(e.kids[1], rels);
    case GradeExpr::Kind::Join:
      return grade_mask(e.kids[0], rels) | grade_mask(e.kids[1], rels);
    }
    return 0;
  }

  bool serial(std::uint64_t mask) const {
    std::uint64_t row = (std::uint64_t{1} << n) - 1;
    for (int w = 0; w < n; ++w)
      if (!(mask & (row << (w * n))))
        return false;
    return true;
  }

  Interpretation materialize(const std::map<std::string, std::uint64_t>& val) const {
    std::vector<std::string> worlds;
    for (int i = 0; i < n; ++i)
      worlds.push_back("w" + std::to_string(i));
    std::vector<std::vector<std::uint64_t>> rows(
        poset.size(), std::vector<std::uint64_t>(n, 0));
    std::uint64_t rowmask = (std::uint64_t{1} << n) - 1;
    for (int g = 0; g < poset.size(); ++g)
      for (int w = 0; w < n; ++w)
        rows[g][w] = (rel[g] >> (w * n)) & rowmask;
    return Interpretation::unchecked(poset, std::move(worlds), std::move(rows), val);
  }

  // true once a countermodel has been recorded
  bool try_valuations() {
    const std::size_t k = atoms.size();
    std::map<std::string, std::uint64_t> val;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (k * n)); ++bits) {
      for (std::size_t a = 0; a < k; ++a)
        val[atoms[a]] = (bits >> (a * n)) & ((std::uint64_t{1} << n) - 1);
      ++verdict->models_checked;
      for (int w = 0; w < n; ++w) {
        if (!eval(formula, w, val, rel)) {
          Interpretation I = materialize(val);
          verdict->countermodel = std::move(I);
          verdict->witness_world = "w" + std::to_string(w);
          return true;
        }
      }
      if (k == 0)
        break;
    }
    return false;
  }

  bool assign(std::size_t pos) {
    if (pos == order.size())
      return try_valuations();
    int g = order[pos];
    std::uint64_t base = 0;
    for (int lo : lower[g])
      base |= rel[lo];
    bool is_top = g == poset.top_index();
    std::uint64_t comp = full & ~base;
    // iterate all supersets of base
    std::uint64_t extra = 0;
    while (true) {
      rel[g] = base | extra;
      if (!is_top || serial(rel[g])) {
        if (assign(pos + 1))
          return true;
      }
      if (extra == comp)
        break;
      extra = (extra - comp) & comp; // next subset of comp
    }
    return false;
  }
};

} // namespace detail

// Searches graded interpretations falsifying f somewhere. Monotonicity is
// enforced constructively: relations are assigned along a linear extension,
// each one a superset of the union of the relations strictly below it.
inline Verdict find_countermodel(const Formula& f, const GeneratorPoset& p,
                                 int max_worlds,
                                 SearchMode mode = SearchMode::Exhaustive,
                                 std::uint64_t seed = 0,
                                 std::uint64_t random_tries = 50000) {
  if (max_worlds < 1)
    throw Error("find_countermodel: max_worlds must be >= 1");
  auto stats = analyze(f);
  std::vector<std::string> atoms(stats.atoms.begin(), stats.atoms.end());
  if (mode == SearchMode::Exhaustive) {
    if (max_worlds > 3)
      throw Error("find_countermodel: exhaustive search limited to 3 worlds");
    if (p.size() > 5)
      throw Error("find_countermodel: exhaustive search limited to 5 generators");
    if (atoms.size() > 3)
      throw Error("find_countermodel: exhaustive search limited to 3 atoms");
  } else {
    if (max_worlds > 8)
      throw Error("find_countermodel: randomized search limited to 8 worlds");
  }

  Verdict verdict;
  std::vector<std::vector<int>> lower(p.size());
  for (int a = 0; a < p.size(); ++a)
    for (int b = 0; b < p.size(); ++b)
      if (a != b && p.leq(b, a))
        lower[a].push_back(b);

  if (mode == SearchMode::Exhaustive) {
    for (int n = 1; n <= max_worlds; ++n) {
      detail::SearchContext ctx{p, f, p.linear_extension(), lower, atoms, 0, {}, 0, nullptr};
      ctx.n = n;
      ctx.full = (n * n == 64) ? ~std::uint64_t{0}
                               : (std::uint64_t{1} << (n * n)) - 1;
      ctx.rel.assign(p.size(), 0);
      ctx.verdict = &verdict;
      verdict.worlds_searched = n;
      if (ctx.assign(0))
        return verdict;
    }
    return verdict;
  }

  std::mt19937_64 rng(seed);
  auto order = p.linear_extension();
  for (std::uint64_t t = 0; t < random_tries; ++t) {
    int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_worlds));
    verdict.worlds_searched = std::max(verdict.worlds_searched, n);
    detail::SearchContext ctx{p, f, order, lower, atoms, 0, {}, 0, nullptr};
    ctx.n = n;
    ctx.full = (n * n >= 64) ? ~std::uint64_t{0}
                             : (std::uint64_t{1} << (n * n)) - 1;
    ctx.rel.assign(p.size(), 0);
    ctx.verdict = &verdict;
    for (int g : order) {
      std::uint64_t base = 0;
      for (int lo : lower[g])
        base |= ctx.rel[lo];
      ctx.rel[g] = (base | (rng() & rng())) & ctx.full;
    }
    // force the top relation serial
    int top = p.top_index();
    for (int w = 0; w < n; ++w) {
      std::uint64_t row = ((std::uint64_t{1} << n) - 1) << (w * n);
      if (!(ctx.rel[top] & row))
        ctx.rel[top] |= std::uint64_t{1} << (w * n + static_cast<int>(rng() % n));
    }
    std::map<std::string, std::uint64_t> val;
    for (const auto& a : atoms)
      val[a] = rng() & ((std::uint64_t{1} << n) - 1);
    ++verdict.models_checked;
    for (int w = 0; w < n; ++w)
      if (!ctx.eval(f, w, val, ctx.rel)) {
        verdict.countermodel = ctx.materialize(val);
        verdict.witness_world = "w" + std::to_string(w);
        return verdict;
      }
  }
  return verdict;
}

// Seeded generator of random valid interpretations, used by sampling tests.
inline Interpretation random_interpretation(const GeneratorPoset& p,
                                            const std::vector<std::string>& atoms,
                                            int max_worlds, std::mt19937_64& rng) {
  int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_worlds));
  std::vector<std::string> worlds;
  for (int i = 0; i < n; ++i)
    worlds.push_back("w" + std::to_string(i));
  std::vector<std::vector<std::uint64_t>> rel(
      p.size(), std::vector<std::uint64_t>(n, 0));
  std::uint64_t rowmask = (std::uint64_t{1} << n) - 1;
  for (int g : p.linear_extension()) {
    for (int w = 0; w < n; ++w) {
      std::uint64_t base = 0;
      for (int b = 0; b < p.size(); ++b)
        if (b != g && p.leq(b, g))
          base |= rel[b][w];
      rel[g][w] = (base | (rng() & rng() & rowmask)) & rowmask;
    }
  }
  int top = p.top_index();
  for (int w = 0; w < n; ++w)
    if (rel[top][w] == 0)
      rel[top][w] = std::uint64_t{1} << (rng() % n);
  std::map<std::string, std::uint64_t> val;
  for (const auto& a : atoms)
    val[a] = rng() & rowmask;
  return Interpretation::unchecked(p, std::move(worlds), std::move(rel),
                                   std::move(val));
}

} // namespace graded
