#include "jvg/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jvg {

namespace {

// Pooling sums in sorted index order, which makes the encoding bitwise
// invariant to token permutations, not just mathematically invariant.
Vec pooled_mean(const PhraseSpan& span, const ConstParamBlocks& b, int dim) {
  PhraseSpan sorted = span;
  std::sort(sorted.begin(), sorted.end());
  Vec mean = Vec::Zero(dim);
  for (int idx : sorted) mean += b.embedding.row(idx).transpose();
  return mean / static_cast<Scalar>(sorted.size());
}

}  // namespace

PhraseSpan node_span(const SgNode& n, const Vocabulary& v) {
  PhraseSpan span;
  for (const auto& t : n.head) span.push_back(v.lookup(t));
  for (const auto& attr : n.attributes)
    for (const auto& t : attr) span.push_back(v.lookup(t));
  return span;
}

PhraseSpan edge_span(const SgEdge& e, const Vocabulary& v) {
  PhraseSpan span;
  for (const auto& t : e.relation) span.push_back(v.lookup(t));
  return span;
}

Vec encode_phrase(const PhraseSpan& span, const ModelParams& params) {
  if (span.empty()) throw std::invalid_argument("encode_phrase: empty span");
  const auto b = params.blocks();
  return b.enc_w * pooled_mean(span, b, params.cfg.embed_dim) + b.enc_b;
}

void encode_phrase_backward(const PhraseSpan& span, const ModelParams& params,
                            const Vec& d_enc, Vec& grad) {
  const auto b = params.blocks();
  auto g = map_blocks(params.cfg, grad);
  const Vec mean = pooled_mean(span, b, params.cfg.embed_dim);

  g.enc_w += d_enc * mean.transpose();
  g.enc_b += d_enc;
  const Vec d_mean = b.enc_w.transpose() * d_enc;
  const Scalar inv = Scalar(1) / static_cast<Scalar>(span.size());
  for (int idx : span) g.embedding.row(idx) += inv * d_mean.transpose();
}

int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               ModelParams& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  auto emb = params.blocks().embedding;
  int loaded = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<Scalar> values;
    Scalar v;
    while (ss >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != params.cfg.embed_dim)
      throw std::runtime_error(
          "embedding file line " + std::to_string(line_no) + ": got " +
          std::to_string(values.size()) + " values, expected " +
          std::to_string(params.cfg.embed_dim));
    if (!vocab.contains(token)) continue;
    const int row = vocab.lookup(token);
    for (int d = 0; d < params.cfg.embed_dim; ++d) emb(row, d) = values[d];
    ++loaded;
  }
  return loaded;
}

}  // namespace jvg
