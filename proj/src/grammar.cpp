#include "jvg/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jvg {

using nlohmann::json;

bool Grammar::in_lexicon(const std::string& t) const {
  if (is_determiner(t) || is_attribute(t) || is_noun(t)) return true;
  for (const auto& phrase : relations)
    if (std::find(phrase.begin(), phrase.end(), t) != phrase.end()) return true;
  return false;
}

std::vector<std::string> Grammar::lexicon() const {
  std::set<std::string> all;
  all.insert(determiners.begin(), determiners.end());
  all.insert(attributes.begin(), attributes.end());
  all.insert(nouns.begin(), nouns.end());
  for (const auto& phrase : relations) all.insert(phrase.begin(), phrase.end());
  return {all.begin(), all.end()};
}

void validate_grammar(const Grammar& g) {
  auto overlap = [](const std::set<std::string>& a,
                    const std::set<std::string>& b) -> const std::string* {
    for (const auto& t : a)
      if (b.count(t)) return &t;
    return nullptr;
  };
  if (const auto* t = overlap(g.determiners, g.attributes))
    throw std::runtime_error("grammar: token in determiners and attributes: " + *t);
  if (const auto* t = overlap(g.determiners, g.nouns))
    throw std::runtime_error("grammar: token in determiners and nouns: " + *t);
  if (const auto* t = overlap(g.attributes, g.nouns))
    throw std::runtime_error("grammar: token in attributes and nouns: " + *t);
  for (const auto& phrase : g.relations)
    if (phrase.empty())
      throw std::runtime_error("grammar: empty relation phrase");
}

json grammar_to_json(const Grammar& g) {
  json rels = json::array();
  for (const auto& phrase : g.relations) rels.push_back(phrase);
  return {{"determiners", g.determiners},
          {"attributes", g.attributes},
          {"nouns", g.nouns},
          {"relations", rels}};
}

Grammar grammar_from_json(const json& j) {
  Grammar g;
  auto read_set = [&](const char* key, std::set<std::string>& out) {
    if (!j.contains(key) || !j.at(key).is_array())
      throw std::runtime_error(std::string("grammar json: missing array ") + key);
    for (const auto& t : j.at(key)) out.insert(t.get<std::string>());
  };
  read_set("determiners", g.determiners);
  read_set("attributes", g.attributes);
  read_set("nouns", g.nouns);
  if (!j.contains("relations") || !j.at("relations").is_array())
    throw std::runtime_error("grammar json: missing array relations");
  for (const auto& phrase : j.at("relations"))
    g.relations.push_back(phrase.get<TokenSeq>());
  validate_grammar(g);
  return g;
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grammar file: " + path);
  return grammar_from_json(json::parse(in));
}

std::vector<Token> tokenize(const std::string& expression) {
  std::vector<Token> out;
  std::string word;
  auto flush = [&] {
    // strip surrounding punctuation, keep inner hyphens etc.
    size_t b = 0, e = word.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
    if (e > b)
      out.push_back({word.substr(b, e - b), static_cast<int>(out.size())});
    word.clear();
  };
  for (char c : expression) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  if (out.empty()) throw std::invalid_argument("tokenize: empty expression");
  return out;
}

namespace {

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, const Grammar& g)
      : toks_(tokens), g_(g) {
    // longest phrases first so "to the left of" wins over "left of"
    rel_order_.resize(g_.relations.size());
    for (size_t i = 0; i < rel_order_.size(); ++i) rel_order_[i] = i;
    std::stable_sort(rel_order_.begin(), rel_order_.end(),
                     [&](size_t a, size_t b) {
                       return g_.relations[a].size() > g_.relations[b].size();
                     });
  }

  SceneGraph run() {
    for (const auto& t : toks_)
      if (!g_.in_lexicon(t.text))
        throw std::runtime_error("parse: unknown token '" + t.text +
                                 "' at position " + std::to_string(t.position));
    SceneGraph out;
    const int head = parse_core_np(out);
    while (pos_ < toks_.size()) {
      const TokenSeq* rel = match_relation();
      if (rel == nullptr)
        throw std::runtime_error("parse: unexpected token '" +
                                 toks_[pos_].text + "' at position " +
                                 std::to_string(toks_[pos_].position));
      if (pos_ >= toks_.size())
        throw std::runtime_error("parse: dangling relation at end of expression");
      const int object = parse_core_np(out);
      out.edges.push_back({head, *rel, object});
    }
    out.referent = head;
    return out;
  }

 private:
  const TokenSeq* match_relation() {
    for (size_t idx : rel_order_) {
      const TokenSeq& phrase = g_.relations[idx];
      if (pos_ + phrase.size() > toks_.size()) continue;
      bool ok = true;
      for (size_t k = 0; k < phrase.size(); ++k)
        if (toks_[pos_ + k].text != phrase[k]) {
          ok = false;
          break;
        }
      if (ok) {
        pos_ += phrase.size();
        return &phrase;
      }
    }
    return nullptr;
  }

  // DET? ATTR* NOUN
  int parse_core_np(SceneGraph& out) {
    if (pos_ >= toks_.size())
      throw std::runtime_error("parse: expected noun phrase at end of expression");
    if (g_.is_determiner(toks_[pos_].text)) ++pos_;
    SgNode node;
    while (pos_ < toks_.size() && g_.is_attribute(toks_[pos_].text)) {
      node.attributes.push_back({toks_[pos_].text});
      ++pos_;
    }
    if (pos_ >= toks_.size() || !g_.is_noun(toks_[pos_].text)) {
      const std::string got =
          pos_ < toks_.size() ? "'" + toks_[pos_].text + "'" : "end of expression";
      const std::string at =
          pos_ < toks_.size() ? std::to_string(toks_[pos_].position) : "end";
      throw std::runtime_error("parse: expected noun, got " + got +
                               " at position " + at);
    }
    node.head = {toks_[pos_].text};
    ++pos_;
    node.id = out.node_count();
    out.nodes.push_back(std::move(node));
    return out.nodes.back().id;
  }

  const std::vector<Token>& toks_;
  const Grammar& g_;
  std::vector<size_t> rel_order_;
  size_t pos_ = 0;
};

}  // namespace

SceneGraph parse_expression(const std::vector<Token>& tokens, const Grammar& g) {
  validate_grammar(g);
  SceneGraph out = Parser(tokens, g).run();
  auto violations = validate_graph(out);
  if (!violations.empty())
    throw std::runtime_error("parse: produced invalid graph: " +
                             violations.front());
  return out;
}

SceneGraph parse_expression(const std::string& expression, const Grammar& g) {
  return parse_expression(tokenize(expression), g);
}

}  // namespace jvg
