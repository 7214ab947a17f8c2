#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/scene_graph.hpp"

namespace jvg {

struct Token {
  std::string text;  // lowercase
  int position = 0;  // 0-based index in the token stream
};

// Restricted referring-expression grammar:
//   NP := DET? ATTR* NOUN (REL NP)*
// Relation phrases are multi-token and matched longest-first. Relation
// chains attach to the head that governs them, so the object NP of a
// relation is core-only (DET? ATTR* NOUN).
struct Grammar {
  std::set<std::string> determiners;
  std::set<std::string> attributes;
  std::set<std::string> nouns;
  std::vector<TokenSeq> relations;

  bool is_determiner(const std::string& t) const { return determiners.count(t) > 0; }
  bool is_attribute(const std::string& t) const { return attributes.count(t) > 0; }
  bool is_noun(const std::string& t) const { return nouns.count(t) > 0; }
  bool in_lexicon(const std::string& t) const;

  // every token usable anywhere in an expression, sorted and unique
  std::vector<std::string> lexicon() const;
};

// Checks the Grammar invariants (disjoint token sets, non-empty relation
// phrases); throws std::runtime_error on violation.
void validate_grammar(const Grammar& g);

nlohmann::json grammar_to_json(const Grammar& g);
Grammar grammar_from_json(const nlohmann::json& j);
Grammar load_grammar(const std::string& path);

// Lowercases, splits on whitespace, strips surrounding punctuation.
// Throws std::invalid_argument when no tokens remain.
std::vector<Token> tokenize(const std::string& expression);

SceneGraph parse_expression(const std::vector<Token>& tokens, const Grammar& g);

// tokenize + parse in one step
SceneGraph parse_expression(const std::string& expression, const Grammar& g);

}  // namespace jvg
