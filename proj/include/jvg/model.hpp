#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "jvg/grammar.hpp"
#include "jvg/types.hpp"
#include "jvg/vocabulary.hpp"

namespace jvg {

struct ModelConfig {
  int vocab_size = 0;
  int embed_dim = 300;   // word embedding width
  int phrase_dim = 128;  // phrase encoding width, shared by potentials
  int appear_dim = 32;   // region appearance width
  int spatial_dim = 8;   // projected spatial feature width

  int region_dim() const { return appear_dim + spatial_dim; }
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

// Views into one flat parameter vector. Layout (column-major blocks):
//   embedding  V x D_emb      word embeddings, row 0 = unknown token
//   enc_w/b    D_w x D_emb    affine after mean pooling
//   sp_w/b     D_sp x 5       spatial feature projection
//   un_w1/b1   D_w x D_x      unary potential, first affine
//   un_w2/b2   D_w -> 1       unary potential, score affine
//   bi_w1/b1   D_w x 2*D_x    binary potential, first affine
//   bi_w2/b2   D_w -> 1       binary potential, score affine
template <typename V, typename M>
struct BlockViews {
  Eigen::Map<M> embedding;
  Eigen::Map<M> enc_w;
  Eigen::Map<V> enc_b;
  Eigen::Map<M> sp_w;
  Eigen::Map<V> sp_b;
  Eigen::Map<M> un_w1;
  Eigen::Map<V> un_b1;
  Eigen::Map<V> un_w2;
  Eigen::Map<V> un_b2;  // size 1
  Eigen::Map<M> bi_w1;
  Eigen::Map<V> bi_b1;
  Eigen::Map<V> bi_w2;
  Eigen::Map<V> bi_b2;  // size 1
};

using ParamBlocks = BlockViews<Vec, Mat>;
using ConstParamBlocks = BlockViews<const Vec, const Mat>;

Index param_count(const ModelConfig& cfg);
ParamBlocks map_blocks(const ModelConfig& cfg, Vec& flat);
ConstParamBlocks map_blocks(const ModelConfig& cfg, const Vec& flat);

// Embedding table plus every projection weight of the potential networks,
// flat-indexable for finite-difference sweeps and the optimizer.
struct ModelParams {
  ModelConfig cfg;
  Vec flat;

  explicit ModelParams(const ModelConfig& c)
      : cfg(c), flat(Vec::Zero(param_count(c))) {}

  Index size() const { return flat.size(); }
  ParamBlocks blocks() { return map_blocks(cfg, flat); }
  ConstParamBlocks blocks() const { return map_blocks(cfg, flat); }
};

// Uniform init in [-0.08, 0.08]; the unknown-token embedding row is zeroed.
ModelParams random_init(const ModelConfig& cfg, std::uint64_t seed);

// Checkpoints carry the parameters plus the vocabulary and grammar so a
// saved model can parse and ground expressions on its own.
struct Checkpoint {
  ModelParams params;
  Vocabulary vocab;
  Grammar grammar;
};

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace jvg
