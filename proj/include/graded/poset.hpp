#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graded/error.hpp"

namespace graded {

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0]))))
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      return false;
  return true;
}

// Finite poset of grade generators with a distinguished top element.
// Immutable after construction; the reflexive-transitive closure of the
// declared strict pairs is precomputed.
class GeneratorPoset {
public:
  GeneratorPoset(std::vector<std::string> generators, std::string top,
                 std::vector<std::pair<std::string, std::string>> strict_pairs) {
    for (const auto& g : generators) {
      if (!is_identifier(g))
        throw ValidationError("invalid generator identifier '" + g + "'");
      if (index_.count(g))
        throw ValidationError("duplicate generator '" + g + "'");
      index_.emplace(g, static_cast<int>(gens_.size()));
      gens_.push_back(g);
    }
    if (!index_.count(top)) {
      if (!is_identifier(top))
        throw ValidationError("invalid top identifier '" + top + "'");
      index_.emplace(top, static_cast<int>(gens_.size()));
      gens_.push_back(top);
    }
    top_ = index_.at(top);

    const int n = static_cast<int>(gens_.size());
    leq_.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
      leq_[i][i] = 1;
    for (const auto& [a, b] : strict_pairs) {
      int ia = index_of(a);
      int ib = index_of(b);
      leq_[ia][ib] = 1;
    }
    // every generator sits below top
    for (int i = 0; i < n; ++i)
      leq_[i][top_] = 1;
    // Warshall closure
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (leq_[i][k])
          for (int j = 0; j < n; ++j)
            if (leq_[k][j])
              leq_[i][j] = 1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (leq_[i][j] && leq_[j][i])
          throw ValidationError("order cycle between generators '" + gens_[i] +
                                "' and '" + gens_[j] + "'");
  }

  // Poset file grammar:
  //   generators: <id>+
  //   top: <id>
  //   order:
  //   <id> < <id>      (zero or more)
  // '#' starts a comment.
  static GeneratorPoset parse(std::string_view text) {
    std::vector<std::string> gens;
    std::optional<std::string> top;
    std::vector<std::pair<std::string, std::string>> pairs;
    bool in_order = false;
    int lineno = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos)
        line.erase(h);
      std::istringstream ls(line);
      std::string tok;
      if (!(ls >> tok))
        continue;
      auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError("poset line " + std::to_string(lineno) + ": " + msg);
      };
      if (tok == "generators:") {
        std::string id;
        while (ls >> id) {
          if (!is_identifier(id))
            throw fail("bad identifier '" + id + "'");
          gens.push_back(id);
        }
      } else if (tok == "top:") {
        std::string id;
        if (!(ls >> id) || !is_identifier(id))
          throw fail("expected identifier after 'top:'");
        top = id;
      } else if (tok == "order:") {
        in_order = true;
      } else if (in_order) {
        std::string lt, rhs;
        if (!(ls >> lt) || lt != "<" || !(ls >> rhs))
          throw fail("expected '<id> < <id>'");
        std::string extra;
        if (ls >> extra)
          throw fail("trailing text '" + extra + "'");
        pairs.emplace_back(tok, rhs);
      } else {
        throw fail("unexpected token '" + tok + "'");
      }
    }
    if (!top)
      throw ParseError("poset file: missing 'top:' line");
    GeneratorPoset p(std::move(gens), *top, {});
    // re-run with declared-generator checking: pairs may only name declared ids
    for (const auto& [a, b] : pairs) {
      if (!p.index_.count(a))
        throw ParseError("poset file: undeclared generator '" + a + "' in order section");
      if (!p.index_.count(b))
        throw ParseError("poset file: undeclared generator '" + b + "' in order section");
    }
    return GeneratorPoset(p.gens_, p.top(), std::move(pairs));
  }

  int size() const { return static_cast<int>(gens_.size()); }
  const std::vector<std::string>& generators() const { return gens_; }
  const std::string& name(int i) const { return gens_.at(i); }
  const std::string& top() const { return gens_[top_]; }
  int top_index() const { return top_; }

  bool declared(std::string_view id) const {
    return index_.count(std::string(id)) != 0;
  }

  int index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end())
      throw ValidationError("undeclared generator '" + std::string(id) + "'");
    return it->second;
  }

  bool leq(int a, int b) const { return leq_.at(a).at(b) != 0; }
  bool leq(std::string_view a, std::string_view b) const {
    return leq(index_of(a), index_of(b));
  }

  // Indices ordered so that smaller elements come first; top is last.
  std::vector<int> linear_extension() const {
    std::vector<int> order;
    std::vector<char> placed(gens_.size(), 0);
    const int n = size();
    while (static_cast<int>(order.size()) < n) {
      for (int i = 0; i < n; ++i) {
        if (placed[i])
          continue;
        bool ready = true;
        for (int j = 0; j < n; ++j)
          if (!placed[j] && j != i && leq(j, i)) {
            ready = false;
            break;
          }
        if (ready) {
          placed[i] = 1;
          order.push_back(i);
        }
      }
    }
    return order;
  }

  bool operator==(const GeneratorPoset& o) const {
    return gens_ == o.gens_ && top_ == o.top_ && leq_ == o.leq_;
  }

private:
  std::vector<std::string> gens_;
  std::unordered_map<std::string, int> index_;
  int top_ = 0;
  std::vector<std::vector<char>> leq_;
};

} // namespace graded
