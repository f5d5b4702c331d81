#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "graded/engine.hpp"
#include "graded/error.hpp"
#include "graded/kripke.hpp"
#include "graded/poset.hpp"
#include "graded/proof.hpp"

namespace graded {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline GeneratorPoset load_poset(const std::filesystem::path& path) {
  return GeneratorPoset::parse(read_file(path));
}

// 'poset:' lines inside kb/proof/interpretation files resolve relative to
// the referring file.
inline std::filesystem::path resolve_sibling(const std::filesystem::path& from,
                                             const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute())
    return p;
  return from.parent_path() / p;
}

inline KnowledgeBase load_kb(const std::filesystem::path& path) {
  RawKnowledgeBase raw = parse_kb_text(read_file(path));
  if (!raw.poset_path)
    throw ParseError("kb file " + path.string() + ": missing 'poset:' line");
  GeneratorPoset p = load_poset(resolve_sibling(path, *raw.poset_path));
  return make_kb(raw, p);
}

inline Proof load_proof(const std::filesystem::path& path) {
  RawProof raw = parse_proof_text(read_file(path));
  if (!raw.poset_path)
    throw ParseError("proof file " + path.string() + ": missing 'poset:' line");
  GeneratorPoset p = load_poset(resolve_sibling(path, *raw.poset_path));
  return make_proof(raw, p);
}

inline Interpretation load_interpretation(const std::filesystem::path& path) {
  RawInterpretation raw = parse_interpretation_text(read_file(path));
  if (!raw.poset_path)
    throw ParseError("interpretation file " + path.string() +
                     ": missing 'poset:' line");
  GeneratorPoset p = load_poset(resolve_sibling(path, *raw.poset_path));
  return validate_interpretation(raw, p);
}

} // namespace graded
