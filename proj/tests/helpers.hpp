#pragma once

#include <string>
#include <vector>

#include "jvg/factor_graph.hpp"
#include "jvg/numeric.hpp"
#include "jvg/rng.hpp"
#include "jvg/scene_graph.hpp"

namespace jvg::test {

// Random tree over m nodes: node i > 0 attaches to a random earlier node
// with random edge direction; node 0 stays the referent unless a flipped
// edge points at it, in which case we re-draw that edge.
inline SceneGraph random_tree_graph(int m, Rng& rng) {
  SceneGraph g;
  for (int i = 0; i < m; ++i)
    g.nodes.push_back({i, {"n" + std::to_string(i)}, {}});
  for (int i = 1; i < m; ++i) {
    const int other = static_cast<int>(rng.below(i));
    // keep node 0 at in-degree zero
    if (other != 0 && rng.uniform() < 0.5)
      g.edges.push_back({i, {"rel"}, other});
    else
      g.edges.push_back({other, {"rel"}, i});
  }
  g.referent = 0;
  return g;
}

inline Vec random_prob_row(int n, Rng& rng) {
  Vec scores(n);
  for (int i = 0; i < n; ++i) scores[i] = rng.normal();
  return softmax(scores);
}

inline Mat random_prob_table(int n, Rng& rng) {
  Vec scores(n * n);
  for (int i = 0; i < n * n; ++i) scores[i] = rng.normal();
  const Vec p = softmax(scores);
  return p.reshaped(n, n);
}

// Random softmax potentials over a random tree, via the public builder.
inline FactorGraph random_factor_graph(int m, int n, Rng& rng) {
  const SceneGraph g = random_tree_graph(m, rng);
  Mat unary(m, n);
  for (int v = 0; v < m; ++v) unary.row(v) = random_prob_row(n, rng).transpose();
  std::vector<Mat> binary;
  for (int e = 0; e < m - 1; ++e) binary.push_back(random_prob_table(n, rng));
  return build_factor_graph(g, unary, binary);
}

inline std::string data_path(const std::string& name) {
  return std::string(JVG_TEST_DATA_DIR) + "/" + name;
}

inline std::string repo_data_path(const std::string& name) {
  return std::string(JVG_DATA_DIR) + "/" + name;
}

}  // namespace jvg::test
