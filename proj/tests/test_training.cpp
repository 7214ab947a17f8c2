#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "jvg/grad_check.hpp"
#include "jvg/pipeline.hpp"
#include "jvg/soft_label.hpp"
#include "jvg/synth.hpp"
#include "jvg/trainer.hpp"

using namespace jvg;

namespace {

// hand-built end-to-end instance: random scene, random tree expression
// structure, tiny dimensions
struct Instance {
  Scene scene;
  SceneGraph graph;
  Vocabulary vocab{std::vector<std::string>{"n0", "n1", "n2", "n3", "n4",
                                            "t0", "t1", "t2", "rel"}};
  ModelParams params;
  Instance(int m, int n, Rng& rng, int phrase_dim = 5)
      : params(make_params(rng, phrase_dim)) {
    graph = test::random_tree_graph(m, rng);
    for (auto& node : graph.nodes)  // sprinkle attributes over the spans
      if (rng.uniform() < 0.6)
        node.attributes.push_back({"t" + std::to_string(rng.range(0, 2))});
    scene.width = 100;
    scene.height = 100;
    for (int i = 0; i < n; ++i) {
      Region r;
      const Scalar w = rng.uniform(8, 40), h = rng.uniform(8, 40);
      r.box[0] = rng.uniform(0, 100 - w);
      r.box[1] = rng.uniform(0, 100 - h);
      r.box[2] = r.box[0] + w;
      r.box[3] = r.box[1] + h;
      r.appearance = Vec(4);
      for (int d = 0; d < 4; ++d) r.appearance[d] = rng.normal();
      scene.regions.push_back(std::move(r));
    }
  }

 private:
  ModelParams make_params(Rng& rng, int phrase_dim) {
    ModelConfig cfg;
    cfg.vocab_size = 11;  // spare rows beyond the vocabulary
    cfg.embed_dim = 4;
    cfg.phrase_dim = phrase_dim;
    cfg.appear_dim = 4;
    cfg.spatial_dim = 3;
    return random_init(cfg, rng.bits());
  }
};

}  // namespace

TEST_CASE("iou") {
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == doctest::Approx(0.0));
  CHECK(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(iou({0, 0, 2, 2}, {2, 0, 4, 2}) == doctest::Approx(0.0));  // touching
  CHECK_THROWS_AS(iou({0, 0, 0, 2}, {0, 0, 2, 2}), std::invalid_argument);
}

TEST_CASE("soft labels at eta = 0.5") {
  auto scene_with_boxes = [](std::vector<Box> boxes) {
    Scene s;
    s.width = 100;
    s.height = 100;
    for (const auto& b : boxes) s.regions.push_back({b, Vec::Zero(1)});
    return s;
  };

  SUBCASE("nothing above the threshold gives a uniform label") {
    const Scene s =
        scene_with_boxes({{0, 0, 10, 10}, {20, 0, 30, 10}, {40, 0, 50, 10}});
    const SoftLabel sl = make_soft_labels(s, {60, 0, 70, 10}, 0.5);
    for (int i = 0; i < 3; ++i)
      CHECK(sl.probs[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  SUBCASE("perfect overlap gets exp(0.5) odds against disjoint regions") {
    const Scene s =
        scene_with_boxes({{0, 0, 10, 10}, {20, 0, 30, 10}, {40, 0, 50, 10},
                          {60, 0, 70, 10}});
    const SoftLabel sl = make_soft_labels(s, {0, 0, 10, 10}, 0.5);
    const int n = 4;
    const Scalar expected = std::exp(0.5) / (std::exp(0.5) + (n - 1));
    CHECK(sl.probs[0] == doctest::Approx(expected).epsilon(1e-12));
    for (int i = 1; i < n; ++i)
      CHECK(sl.probs[i] ==
            doctest::Approx((1 - expected) / (n - 1)).epsilon(1e-9));
  }

  SUBCASE("single region") {
    const Scene s = scene_with_boxes({{0, 0, 10, 10}});
    const SoftLabel sl = make_soft_labels(s, {3, 3, 9, 9}, 0.5);
    REQUIRE(sl.probs.size() == 1);
    CHECK(sl.probs[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("loss values") {
  GroundingResult r;
  r.referent = 0;

  SUBCASE("one-hot marginal on the ground truth has zero loss") {
    r.marginals = Mat::Zero(1, 4);
    r.marginals(0, 2) = 1;
    CHECK(loss(r, Target(2)) == doctest::Approx(0.0));
  }

  SUBCASE("uniform marginal costs log N in the gt setting") {
    r.marginals = Mat::Constant(1, 8, 1.0 / 8);
    CHECK(loss(r, Target(3)) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
  }

  SUBCASE("matching the soft label exactly has zero det loss") {
    SoftLabel sl;
    sl.probs = (Vec(3) << 0.5, 0.3, 0.2).finished();
    r.marginals = sl.probs.transpose();
    CHECK(loss(r, Target(sl)) == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("det loss is nonnegative and zero only at equality") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = rng.range(2, 6);
      SoftLabel sl;
      sl.probs = test::random_prob_row(n, rng);
      GroundingResult g;
      g.referent = 0;
      g.marginals = test::random_prob_row(n, rng).transpose();
      const Scalar val = loss(g, Target(sl));
      CHECK(val >= -1e-15);
      if ((g.marginals.transpose() - sl.probs).cwiseAbs().maxCoeff() > 1e-3)
        CHECK(val > 0);
    }
  }
}

TEST_CASE("reverse-mode gradients match finite differences end to end") {
  Rng rng(101);
  int done = 0;
  Scalar worst = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int m = rng.range(1, 3);
    const int n = rng.range(2, 5);
    Instance ins(m, n, rng);
    PipelineOptions opts;
    opts.marginalize = trial % 4 != 3;  // mostly the marginalized path
    Target target;
    if (trial % 2 == 0) {
      target = Target(rng.range(0, n - 1));
    } else {
      target = Target(make_soft_labels(ins.scene,
                                       ins.scene.regions[rng.below(n)].box, 0.5));
    }
    const GradCheckResult res = finite_difference_check(
        ins.scene, ins.graph, target, ins.vocab, ins.params, opts);
    CAPTURE(trial);
    CAPTURE(res.worst_param);
    CAPTURE(res.analytic);
    CAPTURE(res.numeric);
    CHECK(res.max_rel_err < 1e-4);
    worst = std::max(worst, res.max_rel_err);
    ++done;
  }
  CHECK(done >= 20);
  MESSAGE("worst relative error: ", worst);
}

TEST_CASE("parameters with no path to the loss get exactly zero gradient") {
  Rng rng(55);
  Instance ins(2, 3, rng);
  const Vec grad = gradients(ins.scene, ins.graph, Target(1), ins.vocab,
                             ins.params, {});
  auto g = map_blocks(ins.params.cfg, const_cast<Vec&>(grad));
  // row 10 exists in the table but no token maps to it
  CHECK(g.embedding.row(10).norm() == 0);
  // the unknown-token row is only hit by tokens outside the vocabulary
  CHECK(g.embedding.row(0).norm() == 0);
  // some used row must be nonzero
  CHECK(g.embedding.cwiseAbs().sum() > 0);
}

TEST_CASE("summed aggregation doubles the gradient of a duplicate") {
  Rng rng(56);
  Instance ins(2, 4, rng);
  const Target target(2);
  Vec grad1 = Vec::Zero(ins.params.size());
  example_loss_grad(ins.scene, ins.graph, target, ins.vocab, ins.params, {},
                    grad1);
  Vec grad2 = Vec::Zero(ins.params.size());
  example_loss_grad(ins.scene, ins.graph, target, ins.vocab, ins.params, {},
                    grad2);
  example_loss_grad(ins.scene, ins.graph, target, ins.vocab, ins.params, {},
                    grad2);
  // contributions accumulate per node, so allow reassociation at the ulp level
  CHECK((grad2 - 2 * grad1).cwiseAbs().maxCoeff() < 1e-14);
}

namespace {

SynthSpec tiny_spec() {
  SynthSpec spec;
  spec.num_train = 12;
  spec.num_val = 0;
  spec.num_test = 0;
  spec.regions_per_scene = 5;
  spec.nouns = {"ball", "box", "cup"};
  spec.attributes = {"red", "blue", "green"};
  spec.relations = {{"left", "of"}, {"right", "of"}, {"above"}, {"below"}};
  spec.appearance_dim = 4;
  spec.referent_distractors = 1;
  spec.p_three_nodes = 0.3;
  return spec;
}

ModelConfig tiny_train_config(int vocab) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.embed_dim = 6;
  cfg.phrase_dim = 8;
  cfg.appear_dim = 4;
  cfg.spatial_dim = 3;
  return cfg;
}

}  // namespace

TEST_CASE("fit") {
  const Dataset ds = generate_synthetic_dataset(tiny_spec(), 1234);
  const auto& train = ds.splits.at("train");
  const ModelConfig cfg = tiny_train_config(ds.vocab.size());

  SUBCASE("zero learning rate leaves parameters unchanged") {
    ModelParams params = random_init(cfg, 1);
    const Vec before = params.flat;
    TrainConfig tc;
    tc.learning_rate = 0;
    tc.epochs = 2;
    tc.batch_size = 4;
    fit(params, train, ds.vocab, tc);
    CHECK((params.flat - before).norm() == 0);
  }

  SUBCASE("same seed, same metrics, bit for bit") {
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 4;
    tc.seed = 9;
    ModelParams p1 = random_init(cfg, 2);
    ModelParams p2 = random_init(cfg, 2);
    const auto m1 = fit(p1, train, ds.vocab, tc);
    const auto m2 = fit(p2, train, ds.vocab, tc);
    REQUIRE(m1.size() == m2.size());
    for (size_t e = 0; e < m1.size(); ++e) {
      CHECK(m1[e].mean_loss == m2[e].mean_loss);
      CHECK(m1[e].referent_acc == m2[e].referent_acc);
    }
    CHECK((p1.flat - p2.flat).norm() == 0);
  }

  SUBCASE("a single example is overfit to near zero loss") {
    std::vector<Example> one = {train.front()};
    ModelParams params = random_init(cfg, 3);
    TrainConfig tc;
    tc.epochs = 150;
    tc.batch_size = 1;
    tc.learning_rate = 5e-3;
    tc.decay_every = 1000;
    const auto metrics = fit(params, one, ds.vocab, tc);
    CHECK(metrics.back().mean_loss < 0.05);
    // decreasing after warm-up
    CHECK(metrics.back().mean_loss < metrics[10].mean_loss);
    CHECK(metrics.back().referent_acc == doctest::Approx(1.0));
  }

  SUBCASE("frozen embeddings stay put") {
    ModelParams params = random_init(cfg, 4);
    const Mat emb_before = params.blocks().embedding;
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    tc.freeze_embeddings = true;
    fit(params, train, ds.vocab, tc);
    CHECK((Mat(params.blocks().embedding) - emb_before).norm() == 0);
  }

  SUBCASE("det-setting examples train through soft labels") {
    SynthSpec det_spec = tiny_spec();
    det_spec.setting = "det";
    det_spec.num_train = 16;
    const Dataset det_ds = generate_synthetic_dataset(det_spec, 321);
    ModelParams params = random_init(tiny_train_config(det_ds.vocab.size()), 6);
    TrainConfig tc;
    tc.epochs = 8;
    tc.batch_size = 4;
    const auto metrics = fit(params, det_ds.splits.at("train"), det_ds.vocab, tc);
    CHECK(metrics.back().mean_loss < metrics.front().mean_loss);
    CHECK(std::isfinite(metrics.back().mean_loss));
  }

  SUBCASE("empty dataset is rejected") {
    ModelParams params = random_init(cfg, 5);
    CHECK_THROWS_AS(fit(params, {}, ds.vocab, TrainConfig{}),
                    std::invalid_argument);
  }
}
