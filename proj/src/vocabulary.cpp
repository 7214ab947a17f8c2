#include "jvg/vocabulary.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jvg {

using nlohmann::json;

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  tokens_.push_back("<unk>");
  for (const auto& t : tokens) {
    if (t == "<unk>") continue;
    if (index_.count(t)) throw std::runtime_error("vocabulary: duplicate token " + t);
    index_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(t);
  }
}

Vocabulary vocabulary_from_grammar(const Grammar& g) {
  return Vocabulary(g.lexicon());
}

json vocabulary_to_json(const Vocabulary& v) {
  std::vector<std::string> tokens;
  for (int i = 1; i < v.size(); ++i) tokens.push_back(v.token(i));
  return {{"tokens", tokens}};
}

Vocabulary vocabulary_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tokens") || !j.at("tokens").is_array())
    throw std::runtime_error("vocabulary json: expected {\"tokens\": [...]}");
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
}

}  // namespace jvg
