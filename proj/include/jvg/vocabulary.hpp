#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jvg/grammar.hpp"

namespace jvg {

// Dense token -> index map. Index 0 is reserved for unknown tokens.
class Vocabulary {
 public:
  Vocabulary() { tokens_.push_back("<unk>"); }
  explicit Vocabulary(const std::vector<std::string>& tokens);

  int lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : it->second;
  }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int i) const { return tokens_.at(i); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// All grammar tokens, sorted, so indices are stable across runs.
Vocabulary vocabulary_from_grammar(const Grammar& g);

nlohmann::json vocabulary_to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace jvg
