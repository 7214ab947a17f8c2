#include "jvg/potentials.hpp"

#include <stdexcept>

#include "jvg/numeric.hpp"

namespace jvg {

RegionFeatures region_features(const Scene& scene, const ModelParams& params) {
  const auto b = params.blocks();
  const int n = scene.size();
  if (n == 0) throw std::invalid_argument("region_features: empty scene");
  RegionFeatures out;
  out.raw_spatial.resize(5, n);
  for (int i = 0; i < n; ++i)
    out.raw_spatial.col(i) =
        spatial_features(scene.regions[i].box, scene.width, scene.height);

  const Index d_app = scene.regions.front().appearance.size();
  if (d_app != params.cfg.appear_dim)
    throw std::invalid_argument("region_features: appearance dimension " +
                                std::to_string(d_app) + " does not match config " +
                                std::to_string(params.cfg.appear_dim));
  out.x.resize(params.cfg.region_dim(), n);
  for (int i = 0; i < n; ++i) out.x.col(i).head(d_app) = scene.regions[i].appearance;
  out.x.bottomRows(params.cfg.spatial_dim) =
      (b.sp_w * out.raw_spatial).colwise() + b.sp_b;
  return out;
}

void region_features_backward(const RegionFeatures& feats,
                              const ModelParams& params, const Mat& d_x,
                              Vec& grad) {
  auto g = map_blocks(params.cfg, grad);
  const Mat d_sp = d_x.bottomRows(params.cfg.spatial_dim);
  g.sp_w += d_sp * feats.raw_spatial.transpose();
  g.sp_b += d_sp.rowwise().sum();
}

Vec region_feature(const Region& region, Scalar width, Scalar height,
                   const ModelParams& params) {
  Scene one;
  one.width = width;
  one.height = height;
  one.regions.push_back(region);
  return region_features(one, params).x.col(0);
}

Mat unary_hidden(const Mat& x, const ModelParams& params) {
  const auto b = params.blocks();
  return (b.un_w1 * x).colwise() + b.un_b1;
}

Vec unary_row(const Mat& hidden, const Vec& node_enc, const ModelParams& params,
              UnaryCache* cache) {
  const auto b = params.blocks();
  if (node_enc.size() != params.cfg.phrase_dim)
    throw std::invalid_argument("unary_row: encoding dimension mismatch");
  const int n = static_cast<int>(hidden.cols());
  Mat g = (hidden.array().colwise() * node_enc.array()).matrix();
  Vec scores(n);
  for (int i = 0; i < n; ++i)
    scores[i] = b.un_w2.dot(l2_normalize(g.col(i))) + b.un_b2[0];
  Vec log_row = log_softmax(scores);
  if (cache != nullptr) {
    cache->g = std::move(g);
    cache->scores = scores;
    cache->log_row = log_row;
  }
  return log_row.array().exp().matrix();
}

void unary_row_backward(const Mat& hidden, const Vec& node_enc,
                        const ModelParams& params, const UnaryCache& cache,
                        const Vec& d_log_row, Vec& grad, Vec& d_node_enc,
                        Mat& d_hidden) {
  const auto b = params.blocks();
  auto g = map_blocks(params.cfg, grad);
  const int n = static_cast<int>(hidden.cols());
  const Vec d_scores = log_softmax_backward(cache.log_row, d_log_row);
  for (int i = 0; i < n; ++i) {
    const Vec gi = cache.g.col(i);
    g.un_w2 += d_scores[i] * l2_normalize(gi);
    g.un_b2[0] += d_scores[i];
    const Vec d_gn = d_scores[i] * b.un_w2;
    const Vec d_gi = l2_normalize_backward(gi, d_gn);
    d_hidden.col(i) += d_gi.cwiseProduct(node_enc);
    d_node_enc += d_gi.cwiseProduct(hidden.col(i));
  }
}

void unary_hidden_backward(const Mat& x, const ModelParams& params,
                           const Mat& d_hidden, Vec& grad, Mat& d_x) {
  const auto b = params.blocks();
  auto g = map_blocks(params.cfg, grad);
  g.un_w1 += d_hidden * x.transpose();
  g.un_b1 += d_hidden.rowwise().sum();
  d_x += b.un_w1.transpose() * d_hidden;
}

BinaryHidden binary_hidden(const Mat& x, const ModelParams& params) {
  const auto b = params.blocks();
  const int dx = params.cfg.region_dim();
  BinaryHidden out;
  out.left = b.bi_w1.leftCols(dx) * x;
  out.right = b.bi_w1.rightCols(dx) * x;
  return out;
}

Mat binary_table(const BinaryHidden& hidden, const Vec& edge_enc,
                 const ModelParams& params, BinaryCache* cache) {
  const auto b = params.blocks();
  if (edge_enc.size() != params.cfg.phrase_dim)
    throw std::invalid_argument("binary_table: encoding dimension mismatch");
  const int n = static_cast<int>(hidden.left.cols());
  Mat g(params.cfg.phrase_dim, n * n);
  Mat scores(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Index p = static_cast<Index>(i) * n + j;
      g.col(p) = (hidden.left.col(i) + hidden.right.col(j) + b.bi_b1)
                     .cwiseProduct(edge_enc);
      scores(i, j) = b.bi_w2.dot(l2_normalize(g.col(p))) + b.bi_b2[0];
    }
  }
  const Vec flat = scores.reshaped();
  const Vec log_flat = log_softmax(flat);
  Mat log_table = log_flat.reshaped(n, n);
  if (cache != nullptr) {
    cache->g = std::move(g);
    cache->scores = scores;
    cache->log_table = log_table;
  }
  return log_table.array().exp().matrix();
}

void binary_table_backward(const BinaryHidden& hidden, const Vec& edge_enc,
                           const ModelParams& params, const BinaryCache& cache,
                           const Mat& d_log_table, Vec& grad, Vec& d_edge_enc,
                           BinaryHidden& d_hidden) {
  const auto b = params.blocks();
  auto g = map_blocks(params.cfg, grad);
  const int n = static_cast<int>(hidden.left.cols());
  const Vec d_scores_flat =
      log_softmax_backward(cache.log_table.reshaped(), d_log_table.reshaped());
  const Mat d_scores = d_scores_flat.reshaped(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Index p = static_cast<Index>(i) * n + j;
      const Scalar ds = d_scores(i, j);
      if (ds == Scalar(0)) continue;
      const Vec gp = cache.g.col(p);
      g.bi_w2 += ds * l2_normalize(gp);
      g.bi_b2[0] += ds;
      const Vec d_gn = ds * b.bi_w2;
      const Vec d_gp = l2_normalize_backward(gp, d_gn);
      const Vec d_h = d_gp.cwiseProduct(edge_enc);
      d_edge_enc += d_gp.cwiseProduct(hidden.left.col(i) + hidden.right.col(j) +
                                      b.bi_b1);
      d_hidden.left.col(i) += d_h;
      d_hidden.right.col(j) += d_h;
      g.bi_b1 += d_h;
    }
  }
}

void binary_hidden_backward(const Mat& x, const ModelParams& params,
                            const BinaryHidden& d_hidden, Vec& grad, Mat& d_x) {
  const auto b = params.blocks();
  auto g = map_blocks(params.cfg, grad);
  const int dx = params.cfg.region_dim();
  g.bi_w1.leftCols(dx) += d_hidden.left * x.transpose();
  g.bi_w1.rightCols(dx) += d_hidden.right * x.transpose();
  d_x += b.bi_w1.leftCols(dx).transpose() * d_hidden.left +
         b.bi_w1.rightCols(dx).transpose() * d_hidden.right;
}

Vec unary_potentials(const Scene& scene, const Vec& node_enc,
                     const ModelParams& params) {
  const RegionFeatures feats = region_features(scene, params);
  return unary_row(unary_hidden(feats.x, params), node_enc, params);
}

Mat binary_potentials(const Scene& scene, const Vec& edge_enc,
                      const ModelParams& params) {
  const RegionFeatures feats = region_features(scene, params);
  return binary_table(binary_hidden(feats.x, params), edge_enc, params);
}

}  // namespace jvg
