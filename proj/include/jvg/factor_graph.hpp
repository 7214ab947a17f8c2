#pragma once

#include <vector>

#include "jvg/scene_graph.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Tree-structured factor graph: one variable per scene-graph node with
// domain = regions, one unary factor per variable, one binary factor per
// edge keeping the (subject, object) orientation. Potentials are stored
// in the log domain; linear tables are recoverable by exp.
struct FactorGraph {
  struct BinaryFactor {
    int subject = 0;  // variable index, table rows
    int object = 0;   // variable index, table columns
    Mat log_table;    // N x N
  };

  int num_vars = 0;
  int domain = 0;  // N
  int referent = 0;
  Mat log_unary;  // M x N, one row per variable
  std::vector<BinaryFactor> binaries;
  std::vector<std::vector<int>> var_factors;  // incident binary factors per var

  bool is_tree() const;
};

// Assembles the factor graph for a scene graph from linear-domain
// potential tables. `unary` is M x N (row order = node order); `binary`
// holds one N x N table per edge in edge order. Throws on dimension
// mismatch or when the graph is not a valid tree.
FactorGraph build_factor_graph(const SceneGraph& g, const UnaryTable& unary,
                               const std::vector<BinaryTable>& binary);

// Log-domain assembly used by the training pipeline.
FactorGraph build_factor_graph_log(const SceneGraph& g, const Mat& log_unary,
                                   const std::vector<Mat>& log_binary);

}  // namespace jvg
