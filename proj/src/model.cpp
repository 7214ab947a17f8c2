#include "jvg/model.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jvg/rng.hpp"

namespace jvg {

using nlohmann::json;

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.vocab_size == b.vocab_size && a.embed_dim == b.embed_dim &&
         a.phrase_dim == b.phrase_dim && a.appear_dim == b.appear_dim &&
         a.spatial_dim == b.spatial_dim;
}

namespace {

struct Layout {
  Index embedding, enc_w, enc_b, sp_w, sp_b;
  Index un_w1, un_b1, un_w2, un_b2;
  Index bi_w1, bi_b1, bi_w2, bi_b2;
  Index total;
};

Layout layout_of(const ModelConfig& c) {
  const Index v = c.vocab_size, de = c.embed_dim, dw = c.phrase_dim;
  const Index dx = c.region_dim(), dsp = c.spatial_dim;
  Layout l{};
  Index off = 0;
  auto take = [&off](Index n) {
    Index at = off;
    off += n;
    return at;
  };
  l.embedding = take(v * de);
  l.enc_w = take(dw * de);
  l.enc_b = take(dw);
  l.sp_w = take(dsp * 5);
  l.sp_b = take(dsp);
  l.un_w1 = take(dw * dx);
  l.un_b1 = take(dw);
  l.un_w2 = take(dw);
  l.un_b2 = take(1);
  l.bi_w1 = take(dw * 2 * dx);
  l.bi_b1 = take(dw);
  l.bi_w2 = take(dw);
  l.bi_b2 = take(1);
  l.total = off;
  return l;
}

template <typename V, typename M, typename Flat>
BlockViews<V, M> make_views(const ModelConfig& c, Flat& flat) {
  const Layout l = layout_of(c);
  if (flat.size() != l.total)
    throw std::invalid_argument("parameter vector size does not match config");
  auto* p = flat.data();
  const Index de = c.embed_dim, dw = c.phrase_dim, dx = c.region_dim();
  return BlockViews<V, M>{
      {p + l.embedding, c.vocab_size, de},
      {p + l.enc_w, dw, de},
      {p + l.enc_b, dw},
      {p + l.sp_w, c.spatial_dim, 5},
      {p + l.sp_b, c.spatial_dim},
      {p + l.un_w1, dw, dx},
      {p + l.un_b1, dw},
      {p + l.un_w2, dw},
      {p + l.un_b2, 1},
      {p + l.bi_w1, dw, 2 * dx},
      {p + l.bi_b1, dw},
      {p + l.bi_w2, dw},
      {p + l.bi_b2, 1}};
}

}  // namespace

Index param_count(const ModelConfig& cfg) { return layout_of(cfg).total; }

ParamBlocks map_blocks(const ModelConfig& cfg, Vec& flat) {
  return make_views<Vec, Mat>(cfg, flat);
}

ConstParamBlocks map_blocks(const ModelConfig& cfg, const Vec& flat) {
  return make_views<const Vec, const Mat>(cfg, flat);
}

ModelParams random_init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams p(cfg);
  Rng rng(seed);
  for (Index i = 0; i < p.flat.size(); ++i) p.flat[i] = rng.uniform(-0.08, 0.08);
  p.blocks().embedding.row(0).setZero();
  return p;
}

json checkpoint_to_json(const Checkpoint& c) {
  const ModelConfig& m = c.params.cfg;
  json cfg = {{"vocab_size", m.vocab_size},
              {"embed_dim", m.embed_dim},
              {"phrase_dim", m.phrase_dim},
              {"appear_dim", m.appear_dim},
              {"spatial_dim", m.spatial_dim}};
  std::vector<Scalar> theta(c.params.flat.data(),
                            c.params.flat.data() + c.params.flat.size());
  return {{"format", "jvg-checkpoint"},
          {"version", 1},
          {"config", cfg},
          {"vocab", vocabulary_to_json(c.vocab)},
          {"grammar", grammar_to_json(c.grammar)},
          {"theta", theta}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "jvg-checkpoint")
    throw std::runtime_error("checkpoint: unrecognized format");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("checkpoint: unsupported version");
  const json& cj = j.at("config");
  ModelConfig cfg;
  cfg.vocab_size = cj.at("vocab_size").get<int>();
  cfg.embed_dim = cj.at("embed_dim").get<int>();
  cfg.phrase_dim = cj.at("phrase_dim").get<int>();
  cfg.appear_dim = cj.at("appear_dim").get<int>();
  cfg.spatial_dim = cj.at("spatial_dim").get<int>();

  Checkpoint c{ModelParams(cfg), vocabulary_from_json(j.at("vocab")),
               grammar_from_json(j.at("grammar"))};
  const auto theta = j.at("theta").get<std::vector<Scalar>>();
  if (static_cast<Index>(theta.size()) != c.params.flat.size())
    throw std::runtime_error("checkpoint: theta size does not match config");
  for (Index i = 0; i < c.params.flat.size(); ++i) c.params.flat[i] = theta[i];
  if (c.vocab.size() != cfg.vocab_size)
    throw std::runtime_error("checkpoint: vocabulary size does not match config");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << checkpoint_to_json(c).dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return checkpoint_from_json(json::parse(in));
}

}  // namespace jvg
