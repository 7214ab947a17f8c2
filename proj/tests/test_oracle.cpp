#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "jvg/oracle.hpp"

using namespace jvg;

namespace {

// the worked two-node instance used across the inference tests:
// unary [0.6, 0.4] and [0.5, 0.5], edge table [[0.35, 0.15], [0.10, 0.40]]
FactorGraph two_node_instance() {
  SceneGraph g;
  g.nodes.push_back({0, {"a"}, {}});
  g.nodes.push_back({1, {"b"}, {}});
  g.edges.push_back({0, {"r"}, 1});
  g.referent = 0;
  Mat unary(2, 2);
  unary << 0.6, 0.4, 0.5, 0.5;
  Mat table(2, 2);
  table << 0.35, 0.15, 0.10, 0.40;
  return build_factor_graph(g, unary, {table});
}

}  // namespace

TEST_CASE("joint probability is the product of the potentials") {
  SUBCASE("single node") {
    SceneGraph g;
    g.nodes.push_back({0, {"a"}, {}});
    g.referent = 0;
    Mat unary(1, 2);
    unary << 0.2, 0.8;
    const FactorGraph fg = build_factor_graph(g, unary, {});
    CHECK(joint_probability(fg, {1}) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(joint_probability(fg, {0}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(joint_probability(fg, {2}), std::out_of_range);
  }

  SUBCASE("two-node instance, all four assignments") {
    const FactorGraph fg = two_node_instance();
    CHECK(joint_probability(fg, {0, 0}) == doctest::Approx(0.105).epsilon(1e-12));
    CHECK(joint_probability(fg, {0, 1}) == doctest::Approx(0.045).epsilon(1e-12));
    CHECK(joint_probability(fg, {1, 0}) == doctest::Approx(0.020).epsilon(1e-12));
    CHECK(joint_probability(fg, {1, 1}) == doctest::Approx(0.080).epsilon(1e-12));
  }

  SUBCASE("uniform potentials score every assignment alike") {
    Rng rng(3);
    SceneGraph g = test::random_tree_graph(3, rng);
    const int n = 4;
    Mat unary = Mat::Constant(3, n, 1.0 / n);
    std::vector<Mat> tables(2, Mat::Constant(n, n, 1.0 / (n * n)));
    const FactorGraph fg = build_factor_graph(g, unary, tables);
    const Scalar first = joint_probability(fg, {0, 0, 0});
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> assign = {rng.range(0, n - 1), rng.range(0, n - 1),
                                 rng.range(0, n - 1)};
      CHECK(joint_probability(fg, assign) == doctest::Approx(first).epsilon(1e-12));
    }
  }
}

TEST_CASE("brute force marginals") {
  SUBCASE("single node renormalizes the unary row") {
    SceneGraph g;
    g.nodes.push_back({0, {"a"}, {}});
    g.referent = 0;
    Mat unary(1, 2);
    unary << 2, 8;  // unnormalized on purpose
    const auto res = brute_force(build_factor_graph(g, unary, {}));
    CHECK(res.marginals(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(res.marginals(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("two-node instance: referent row from the 4-assignment enumeration") {
    // scores 0.105, 0.045, 0.020, 0.080 sum to Z = 0.250 and the
    // referent mass at region 0 is 0.150, so the row is [0.6, 0.4]
    const auto res = brute_force(two_node_instance());
    CHECK(res.z == doctest::Approx(0.250).epsilon(1e-12));
    CHECK(res.marginals(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(res.marginals(0, 1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(res.marginals(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("uniform binary tables leave the unary rows unchanged") {
    Rng rng(11);
    const SceneGraph g = test::random_tree_graph(4, rng);
    const int n = 3;
    Mat unary(4, n);
    for (int v = 0; v < 4; ++v)
      unary.row(v) = test::random_prob_row(n, rng).transpose();
    std::vector<Mat> tables(3, Mat::Constant(n, n, 1.0 / (n * n)));
    const Mat marg = brute_force_marginals(build_factor_graph(g, unary, tables));
    CHECK((marg - unary).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("cap exceeded") {
    Rng rng(5);
    const FactorGraph fg = test::random_factor_graph(5, 6, rng);
    CHECK_THROWS_AS(brute_force_marginals(fg, /*cap=*/100), std::runtime_error);
  }

  SUBCASE("clamping conditions the distribution") {
    const FactorGraph fg = two_node_instance();
    const auto cond = brute_force(fg, {{1, 0}});  // fix second node to region 0
    // P(ref = 0 | other = 0) = 0.105 / 0.125
    CHECK(cond.marginals(0, 0) == doctest::Approx(0.105 / 0.125).epsilon(1e-12));
    CHECK(cond.marginals(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
