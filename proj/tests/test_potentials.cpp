#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "jvg/potentials.hpp"

using namespace jvg;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.vocab_size = 4;
  cfg.embed_dim = 5;
  cfg.phrase_dim = 6;
  cfg.appear_dim = 4;
  cfg.spatial_dim = 3;
  return cfg;
}

Scene random_scene(int n, int appear_dim, Rng& rng, Scalar canvas = 100) {
  Scene s;
  s.width = canvas;
  s.height = canvas;
  for (int i = 0; i < n; ++i) {
    Region r;
    const Scalar w = rng.uniform(5, 40), h = rng.uniform(5, 40);
    r.box[0] = rng.uniform(0, canvas - w);
    r.box[1] = rng.uniform(0, canvas - h);
    r.box[2] = r.box[0] + w;
    r.box[3] = r.box[1] + h;
    r.appearance = Vec(appear_dim);
    for (int d = 0; d < appear_dim; ++d) r.appearance[d] = rng.normal();
    s.regions.push_back(std::move(r));
  }
  return s;
}

Vec random_vec(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("spatial features") {
  CHECK((spatial_features({0, 0, 100, 80}, 100, 80) -
         (Vec(5) << 0, 0, 1, 1, 1).finished())
            .norm() == 0);
  CHECK((spatial_features({0, 0, 50, 40}, 100, 80) -
         (Vec(5) << 0, 0, 0.5, 0.5, 0.25).finished())
            .norm() < 1e-15);
  const Vec f = spatial_features({10, 20, 30, 60}, 100, 100);
  CHECK(f[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(f[2] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f[3] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f[4] == doctest::Approx(0.08).epsilon(1e-12));
  CHECK_THROWS_AS(spatial_features({0, 0, 1, 1}, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(spatial_features({0, 0, 1, 1}, 10, -1), std::invalid_argument);
}

TEST_CASE("region feature assembly") {
  SUBCASE("zero appearance and zero projection give a zero vector") {
    ModelParams params(small_config());  // all-zero parameters
    Region r;
    r.box = {10, 10, 50, 50};
    r.appearance = Vec::Zero(4);
    CHECK(region_feature(r, 100, 100, params).norm() == 0);
  }

  SUBCASE("dimension bookkeeping at desk scale") {
    ModelConfig cfg = small_config();
    cfg.appear_dim = 32;
    cfg.spatial_dim = 8;
    CHECK(cfg.region_dim() == 40);
    Rng rng(3);
    ModelParams params = random_init(cfg, 3);
    Scene s = random_scene(2, 32, rng);
    CHECK(region_features(s, params).x.rows() == 40);
  }

  SUBCASE("full-scale dimensions concatenate to 2560") {
    ModelConfig cfg;
    cfg.vocab_size = 1;
    cfg.embed_dim = 300;
    cfg.phrase_dim = 2348;
    cfg.appear_dim = 2048;
    cfg.spatial_dim = 512;
    CHECK(cfg.region_dim() == 2560);
  }

  SUBCASE("appearance dimension mismatch is rejected") {
    Rng rng(4);
    ModelParams params = random_init(small_config(), 4);
    Scene s = random_scene(2, 7, rng);  // config expects 4
    CHECK_THROWS_AS(region_features(s, params), std::invalid_argument);
  }
}

TEST_CASE("unary potentials") {
  const ModelConfig cfg = small_config();
  Rng rng(5);

  SUBCASE("identical regions yield a uniform row") {
    ModelParams params = random_init(cfg, 6);
    Scene s = random_scene(1, cfg.appear_dim, rng);
    for (int i = 0; i < 3; ++i) s.regions.push_back(s.regions[0]);
    const Vec row = unary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    for (int i = 0; i < 4; ++i)
      CHECK(row[i] == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("a single region gets probability one") {
    ModelParams params = random_init(cfg, 7);
    Scene s = random_scene(1, cfg.appear_dim, rng);
    const Vec row = unary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    REQUIRE(row.size() == 1);
    CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("zero score affine means uniform regardless of input") {
    ModelParams params = random_init(cfg, 8);
    auto b = params.blocks();
    b.un_w2.setZero();
    b.un_b2.setZero();
    Scene s = random_scene(5, cfg.appear_dim, rng);
    const Vec row = unary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    for (int i = 0; i < 5; ++i)
      CHECK(row[i] == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("binary potentials") {
  const ModelConfig cfg = small_config();
  Rng rng(9);

  SUBCASE("identical regions yield a uniform table") {
    ModelParams params = random_init(cfg, 10);
    Scene s = random_scene(1, cfg.appear_dim, rng);
    for (int i = 0; i < 2; ++i) s.regions.push_back(s.regions[0]);
    const Mat table = binary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(table(i, j) == doctest::Approx(1.0 / 9).epsilon(1e-12));
  }

  SUBCASE("one region pair collapses to probability one") {
    ModelParams params = random_init(cfg, 11);
    Scene s = random_scene(1, cfg.appear_dim, rng);
    const Mat table = binary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    REQUIRE(table.size() == 1);
    CHECK(table(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("direction is preserved: (i,j) differs from (j,i)") {
    ModelParams params = random_init(cfg, 12);
    Scene s = random_scene(3, cfg.appear_dim, rng);
    const Mat table = binary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    CHECK(std::abs(table(0, 1) - table(1, 0)) > 1e-12);
    CHECK(std::abs(table(0, 2) - table(2, 0)) > 1e-12);
  }
}

TEST_CASE("normalization invariants hold over random evaluations") {
  const ModelConfig cfg = small_config();
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    ModelParams params = random_init(cfg, rng.bits());
    const int n = rng.range(1, 7);
    Scene s = random_scene(n, cfg.appear_dim, rng);
    const Vec row = unary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    CHECK(row.minCoeff() >= 0);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-9));
    const Mat table = binary_potentials(s, random_vec(cfg.phrase_dim, rng), params);
    CHECK(table.minCoeff() >= 0);
    CHECK(table.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("evaluation is a pure function of its inputs") {
  const ModelConfig cfg = small_config();
  Rng rng(15);
  ModelParams params = random_init(cfg, 16);
  Scene s = random_scene(4, cfg.appear_dim, rng);
  const Vec enc = random_vec(cfg.phrase_dim, rng);
  const Vec r1 = unary_potentials(s, enc, params);
  const Vec r2 = unary_potentials(s, enc, params);
  CHECK((r1 - r2).norm() == 0);
  const Mat t1 = binary_potentials(s, enc, params);
  const Mat t2 = binary_potentials(s, enc, params);
  CHECK((t1 - t2).norm() == 0);
}

// finite differences through the table outputs, for parameters and for
// the appearance inputs
TEST_CASE("table gradients match finite differences") {
  const ModelConfig cfg = small_config();
  Rng rng(17);
  ModelParams params = random_init(cfg, 18);
  const int n = 3;
  Scene scene = random_scene(n, cfg.appear_dim, rng);
  const Vec node_enc = random_vec(cfg.phrase_dim, rng);
  const Vec edge_enc = random_vec(cfg.phrase_dim, rng);
  const Mat c_unary = Mat::Random(1, n);   // fixed random co-vectors
  const Mat c_binary = Mat::Random(n, n);

  // scalar = <c_unary, log unary row> + <c_binary, log binary table>
  auto value = [&](const ModelParams& p, const Scene& sc) {
    const RegionFeatures f = region_features(sc, p);
    UnaryCache uc;
    unary_row(unary_hidden(f.x, p), node_enc, p, &uc);
    BinaryCache bc;
    binary_table(binary_hidden(f.x, p), edge_enc, p, &bc);
    return (c_unary * uc.log_row).value() +
           (c_binary.array() * bc.log_table.array()).sum();
  };

  // analytic gradient
  Vec grad = Vec::Zero(params.size());
  Mat d_x = Mat::Zero(cfg.region_dim(), n);
  {
    const RegionFeatures f = region_features(scene, params);
    const Mat h = unary_hidden(f.x, params);
    UnaryCache uc;
    unary_row(h, node_enc, params, &uc);
    const BinaryHidden bh = binary_hidden(f.x, params);
    BinaryCache bc;
    binary_table(bh, edge_enc, params, &bc);

    Mat d_hidden = Mat::Zero(cfg.phrase_dim, n);
    Vec d_node = Vec::Zero(cfg.phrase_dim);
    unary_row_backward(h, node_enc, params, uc, c_unary.transpose(), grad,
                       d_node, d_hidden);
    unary_hidden_backward(f.x, params, d_hidden, grad, d_x);

    BinaryHidden d_bh;
    d_bh.left = Mat::Zero(cfg.phrase_dim, n);
    d_bh.right = Mat::Zero(cfg.phrase_dim, n);
    Vec d_edge = Vec::Zero(cfg.phrase_dim);
    binary_table_backward(bh, edge_enc, params, bc, c_binary, grad, d_edge,
                          d_bh);
    binary_hidden_backward(f.x, params, d_bh, grad, d_x);
    region_features_backward(f, params, d_x, grad);
  }

  const Scalar h = 1e-5;
  Scalar max_rel = 0;
  for (Index k = 0; k < params.size(); ++k) {
    if (k < cfg.vocab_size * cfg.embed_dim +
                cfg.phrase_dim * cfg.embed_dim + cfg.phrase_dim)
      continue;  // encoder blocks do not feed the tables here
    ModelParams p = params;
    p.flat[k] += h;
    const Scalar up = value(p, scene);
    p.flat[k] -= 2 * h;
    const Scalar down = value(p, scene);
    const Scalar fd = (up - down) / (2 * h);
    const Scalar denom = std::max({std::abs(fd), std::abs(grad[k]), Scalar(1e-6)});
    max_rel = std::max(max_rel, std::abs(fd - grad[k]) / denom);
  }
  CHECK(max_rel < 1e-4);

  // appearance inputs: d_x top block vs finite differences
  Scalar max_rel_x = 0;
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < cfg.appear_dim; ++d) {
      Scene sc = scene;
      sc.regions[i].appearance[d] += h;
      const Scalar up = value(params, sc);
      sc.regions[i].appearance[d] -= 2 * h;
      const Scalar down = value(params, sc);
      const Scalar fd = (up - down) / (2 * h);
      const Scalar a = d_x(d, i);
      const Scalar denom = std::max({std::abs(fd), std::abs(a), Scalar(1e-6)});
      max_rel_x = std::max(max_rel_x, std::abs(fd - a) / denom);
    }
  }
  CHECK(max_rel_x < 1e-4);
}
