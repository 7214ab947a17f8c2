#pragma once

#include <vector>

#include "jvg/model.hpp"
#include "jvg/scene.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Assembled per-region inputs of the potential networks: appearance
// stacked on the projected spatial feature, one column per region.
struct RegionFeatures {
  Mat raw_spatial;  // 5 x N
  Mat x;            // D_x x N
};

RegionFeatures region_features(const Scene& scene, const ModelParams& params);
void region_features_backward(const RegionFeatures& feats,
                              const ModelParams& params, const Mat& d_x,
                              Vec& grad);

// Single-region form of the assembled feature vector.
Vec region_feature(const Region& region, Scalar width, Scalar height,
                   const ModelParams& params);

// First affine of the unary net, shared by every node of an example.
Mat unary_hidden(const Mat& x, const ModelParams& params);

struct UnaryCache {
  Mat g;        // D_w x N, hidden .* node encoding (pre-normalization)
  Vec scores;   // N
  Vec log_row;  // N, log-softmax of scores
};

// One UnaryTable row: softmax over regions of
// fc2(L2norm(fc1(x_i) .* w_node)). `hidden` is unary_hidden(x).
Vec unary_row(const Mat& hidden, const Vec& node_enc, const ModelParams& params,
              UnaryCache* cache = nullptr);

// Adjoints: d_log_row is the gradient w.r.t. the log potentials. Parameter
// gradients go to `grad`; adjoints of the node encoding and of the shared
// hidden activation accumulate into d_node_enc / d_hidden.
void unary_row_backward(const Mat& hidden, const Vec& node_enc,
                        const ModelParams& params, const UnaryCache& cache,
                        const Vec& d_log_row, Vec& grad, Vec& d_node_enc,
                        Mat& d_hidden);

void unary_hidden_backward(const Mat& x, const ModelParams& params,
                           const Mat& d_hidden, Vec& grad, Mat& d_x);

// Binary net first affine, split into the subject and object halves of
// the pair concatenation: pair hidden = left.col(i) + right.col(j) + b.
struct BinaryHidden {
  Mat left;   // D_w x N
  Mat right;  // D_w x N
};

BinaryHidden binary_hidden(const Mat& x, const ModelParams& params);

struct BinaryCache {
  Mat g;          // D_w x N^2, column i*N+j is the pre-normalization vector
  Mat scores;     // N x N
  Mat log_table;  // N x N, log-softmax over all N^2 entries
};

// Full BinaryTable of one edge: softmax over all ordered region pairs of
// fc2(L2norm(fc1([x_i; x_j]) .* w_edge)). Entry (i, j) keeps subject i,
// object j, so swapping arguments changes the score.
Mat binary_table(const BinaryHidden& hidden, const Vec& edge_enc,
                 const ModelParams& params, BinaryCache* cache = nullptr);

void binary_table_backward(const BinaryHidden& hidden, const Vec& edge_enc,
                           const ModelParams& params, const BinaryCache& cache,
                           const Mat& d_log_table, Vec& grad, Vec& d_edge_enc,
                           BinaryHidden& d_hidden);

void binary_hidden_backward(const Mat& x, const ModelParams& params,
                            const BinaryHidden& d_hidden, Vec& grad, Mat& d_x);

// Convenience forms matching the per-operation contracts.
Vec unary_potentials(const Scene& scene, const Vec& node_enc,
                     const ModelParams& params);
Mat binary_potentials(const Scene& scene, const Vec& edge_enc,
                      const ModelParams& params);

}  // namespace jvg
