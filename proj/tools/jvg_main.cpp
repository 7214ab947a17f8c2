// Command-line front end: parse expressions, ground them against scenes,
// generate synthetic datasets, train, evaluate, and run the numerical
// self-checks. Every command prints machine-readable JSON; human-readable
// notes go to stderr.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jvg/encoder.hpp"
#include "jvg/eval.hpp"
#include "jvg/numeric.hpp"
#include "jvg/rng.hpp"
#include "jvg/grad_check.hpp"
#include "jvg/oracle.hpp"
#include "jvg/pipeline.hpp"
#include "jvg/synth.hpp"
#include "jvg/trainer.hpp"

using namespace jvg;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void emit(const json& j, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump() << std::endl;
}

struct TrainFileConfig {
  ModelConfig model;
  TrainConfig train;
};

TrainFileConfig parse_train_config(const json& j, int vocab_size) {
  TrainFileConfig out;
  out.model.vocab_size = vocab_size;
  if (j.contains("model")) {
    const json& m = j.at("model");
    out.model.embed_dim = m.value("embed_dim", out.model.embed_dim);
    out.model.phrase_dim = m.value("phrase_dim", out.model.phrase_dim);
    out.model.appear_dim = m.value("appear_dim", out.model.appear_dim);
    out.model.spatial_dim = m.value("spatial_dim", out.model.spatial_dim);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    out.train.learning_rate = t.value("learning_rate", out.train.learning_rate);
    out.train.decay = t.value("decay", out.train.decay);
    out.train.decay_every = t.value("decay_every", out.train.decay_every);
    out.train.epochs = t.value("epochs", out.train.epochs);
    out.train.batch_size = t.value("batch_size", out.train.batch_size);
    out.train.seed = t.value("seed", out.train.seed);
    out.train.marginalize = t.value("marginalize", out.train.marginalize);
    out.train.freeze_embeddings =
        t.value("freeze_embeddings", out.train.freeze_embeddings);
    out.train.eta = t.value("eta", out.train.eta);
  }
  return out;
}

int cmd_parse(const std::string& grammar_path, const std::string& expr) {
  const Grammar grammar = load_grammar(grammar_path);
  const SceneGraph g = parse_expression(expr, grammar);
  emit(scene_graph_to_json(g), "");
  return 0;
}

int cmd_ground(const std::string& scene_path, const std::string& expr,
               const std::string& ckpt_path, const std::string& out_path,
               bool no_marginalize) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Scene scene = load_scene(scene_path);
  const SceneGraph graph = parse_expression(expr, ckpt.grammar);
  PipelineOptions opts;
  opts.marginalize = !no_marginalize;
  const GroundingResult r =
      ground_example(scene, graph, ckpt.vocab, ckpt.params, opts);

  for (int v = 0; v < graph.node_count(); ++v) {
    std::string phrase;
    for (const auto& t : graph.nodes[v].head) phrase += t + " ";
    std::cerr << "node " << v << " (" << phrase << ")-> region "
              << r.groundings[v] << "  p="
              << r.marginals(v, r.groundings[v]) << "\n";
  }
  emit(grounding_to_json(r), out_path);
  return 0;
}

int cmd_gen_synth(const std::string& spec_path, std::uint64_t seed,
                  const std::string& out_dir) {
  const SynthSpec spec = load_synth_spec(spec_path);
  const Dataset ds = generate_synthetic_dataset(spec, seed);
  save_dataset(out_dir, ds);
  json counts = json::object();
  for (const auto& [name, examples] : ds.splits)
    counts[name] = examples.size();
  emit({{"out", out_dir}, {"seed", seed}, {"splits", counts}}, "");
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_ckpt, const std::string& embeddings_path,
              std::uint64_t seed, bool seed_set) {
  const Dataset ds = load_dataset(data_dir);
  json config = json::object();
  if (!config_path.empty()) config = read_json_file(config_path);
  TrainFileConfig cfg = parse_train_config(config, ds.vocab.size());
  if (seed_set) cfg.train.seed = seed;

  const auto& train = ds.splits.at("train");
  if (!train.empty())
    cfg.model.appear_dim =
        static_cast<int>(train.front().scene.regions.front().appearance.size());

  ModelParams params = random_init(cfg.model, cfg.train.seed);
  if (!embeddings_path.empty()) {
    const int loaded = load_pretrained_embeddings(embeddings_path, ds.vocab, params);
    std::cerr << "loaded " << loaded << " pretrained embedding rows\n";
  }
  std::cerr << "training on " << train.size() << " examples, "
            << params.size() << " parameters\n";

  const auto t0 = std::chrono::steady_clock::now();
  const auto metrics = fit(params, train, ds.vocab, cfg.train);
  const std::chrono::duration<double> dt =
      std::chrono::steady_clock::now() - t0;

  json epochs = json::array();
  for (const auto& em : metrics) {
    const json row = {{"epoch", em.epoch},
                      {"mean_loss", em.mean_loss},
                      {"referent_acc", em.referent_acc},
                      {"learning_rate", em.learning_rate}};
    std::cerr << row.dump() << "\n";
    epochs.push_back(row);
  }
  save_checkpoint(out_ckpt, {params, ds.vocab, ds.grammar});
  emit({{"checkpoint", out_ckpt},
        {"parameters", params.size()},
        {"seconds", dt.count()},
        {"epochs", epochs}},
       "");
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& ckpt_path,
             const std::string& split, bool no_marginalize) {
  const Dataset ds = load_dataset(data_dir);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!ds.splits.count(split))
    throw std::runtime_error("dataset has no split named " + split);
  EvalOptions opts;
  opts.marginalize = !no_marginalize;
  const Metrics m = evaluate(ds.splits.at(split), ckpt.vocab, ckpt.params, opts);
  emit({{"split", split},
        {"marginalize", opts.marginalize},
        {"examples", m.examples},
        {"referent_acc", m.referent_acc},
        {"supporting_acc", m.supporting_acc},
        {"supporting_nodes", m.supporting_nodes}},
       "");
  return 0;
}

int cmd_oracle_check(int trials, int max_nodes, int max_regions,
                     std::uint64_t seed) {
  Rng rng(seed);
  Scalar worst = 0;
  Scalar worst_z = 0;
  for (int t = 0; t < trials; ++t) {
    const int m = rng.range(1, max_nodes);
    const int n = rng.range(2, max_regions);

    SceneGraph g;
    for (int i = 0; i < m; ++i)
      g.nodes.push_back({i, {"n" + std::to_string(i)}, {}});
    for (int i = 1; i < m; ++i) {
      const int other = static_cast<int>(rng.below(i));
      if (other != 0 && rng.uniform() < 0.5)
        g.edges.push_back({i, {"rel"}, other});
      else
        g.edges.push_back({other, {"rel"}, i});
    }
    g.referent = 0;

    Mat unary(m, n);
    for (int v = 0; v < m; ++v) {
      Vec scores(n);
      for (int i = 0; i < n; ++i) scores[i] = rng.normal();
      unary.row(v) = softmax(scores).transpose();
    }
    std::vector<Mat> tables;
    for (int e = 0; e < m - 1; ++e) {
      Vec scores(n * n);
      for (int i = 0; i < n * n; ++i) scores[i] = rng.normal();
      tables.push_back(softmax(scores).reshaped(n, n));
    }

    const FactorGraph fg = build_factor_graph(g, unary, tables);
    const GroundingResult r = run_belief_propagation(fg);
    const OracleResult oracle = brute_force(fg);
    worst = std::max(worst,
                     (r.marginals - oracle.marginals).cwiseAbs().maxCoeff());
    worst_z = std::max(worst_z, std::abs(std::exp(r.log_partition) - oracle.z) /
                                    oracle.z);
  }
  emit({{"trials", trials},
        {"max_abs_marginal_deviation", worst},
        {"max_rel_partition_deviation", worst_z},
        {"pass", worst < 1e-9}},
       "");
  return worst < 1e-9 ? 0 : 1;
}

int cmd_grad_check(int instances, std::uint64_t seed, Scalar h) {
  SynthSpec spec;
  spec.num_train = instances;
  spec.num_val = 0;
  spec.num_test = 0;
  spec.regions_per_scene = 4;
  spec.nouns = {"ball", "box", "cup"};
  spec.attributes = {"red", "blue", "green"};
  spec.relations = {{"left", "of"}, {"right", "of"}, {"above"}, {"below"}};
  spec.appearance_dim = 4;
  spec.referent_distractors = 1;
  const Dataset ds = generate_synthetic_dataset(spec, seed);

  ModelConfig cfg;
  cfg.vocab_size = ds.vocab.size();
  cfg.embed_dim = 5;
  cfg.phrase_dim = 6;
  cfg.appear_dim = spec.appearance_dim;
  cfg.spatial_dim = 3;

  Rng rng(seed + 1);
  Scalar worst = 0;
  int idx = 0;
  for (const auto& ex : ds.splits.at("train")) {
    const ModelParams params = random_init(cfg, rng.bits());
    PipelineOptions opts;
    opts.marginalize = idx % 4 != 3;
    const Target target =
        idx % 2 == 0 ? Target(ex.gt_referent_region()) : target_of(ex);
    const GradCheckResult res = finite_difference_check(
        ex.scene, ex.graph, target, ds.vocab, params, opts, h);
    worst = std::max(worst, res.max_rel_err);
    ++idx;
  }
  emit({{"instances", instances},
        {"h", h},
        {"max_rel_err", worst},
        {"pass", worst < 1e-4}},
       "");
  return worst < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint visual grounding over language scene graphs"};
  app.require_subcommand(1);

  std::string grammar_path, expr, scene_path, ckpt_path, out_path;
  std::string data_dir, config_path, split = "test", spec_path, out_dir;
  std::string embeddings_path;
  std::uint64_t seed = 0;
  bool no_marginalize = false;
  int trials = 1000, max_nodes = 5, max_regions = 6, instances = 20;
  double h = 1e-5;

  auto* parse_cmd = app.add_subcommand("parse", "expression -> scene graph JSON");
  parse_cmd->add_option("--grammar", grammar_path, "grammar JSON")->required();
  parse_cmd->add_option("--expr", expr, "referring expression")->required();
  parse_cmd->add_option("--seed", seed, "unused; accepted for symmetry");

  auto* ground_cmd = app.add_subcommand("ground", "ground an expression in a scene");
  ground_cmd->add_option("--scene", scene_path, "scene JSON")->required();
  ground_cmd->add_option("--expr", expr, "referring expression")->required();
  ground_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  ground_cmd->add_option("--json", out_path, "also write the result here");
  ground_cmd->add_flag("--no-marginalize", no_marginalize,
                       "ground by unary rows only");
  ground_cmd->add_option("--seed", seed, "unused; accepted for symmetry");

  auto* gen_cmd = app.add_subcommand("gen-synth", "generate a synthetic dataset");
  gen_cmd->add_option("--spec", spec_path, "generator spec JSON")->required();
  gen_cmd->add_option("--seed", seed, "generator seed");
  gen_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "train on a dataset directory");
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--config", config_path, "model/training config JSON");
  train_cmd->add_option("--out", ckpt_path, "output checkpoint")->required();
  train_cmd->add_option("--embeddings", embeddings_path,
                        "pretrained word vectors, lines of `token v1 ... vD`");
  auto* seed_opt = train_cmd->add_option("--seed", seed, "overrides config seed");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
  eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--split", split, "dataset split (default test)");
  eval_cmd->add_flag("--no-marginalize", no_marginalize,
                     "ground by unary rows only");
  eval_cmd->add_option("--seed", seed, "unused; accepted for symmetry");

  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "belief propagation vs enumeration");
  oracle_cmd->add_option("--trials", trials, "number of random instances");
  oracle_cmd->add_option("--max-nodes", max_nodes, "largest graph size");
  oracle_cmd->add_option("--max-regions", max_regions, "largest domain");
  oracle_cmd->add_option("--seed", seed, "instance seed");

  auto* grad_cmd =
      app.add_subcommand("grad-check", "reverse-mode vs finite differences");
  grad_cmd->add_option("--instances", instances, "number of random instances");
  grad_cmd->add_option("--seed", seed, "instance seed");
  grad_cmd->add_option("--step", h, "finite difference step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse_cmd->parsed()) return cmd_parse(grammar_path, expr);
    if (ground_cmd->parsed())
      return cmd_ground(scene_path, expr, ckpt_path, out_path, no_marginalize);
    if (gen_cmd->parsed()) return cmd_gen_synth(spec_path, seed, out_dir);
    if (train_cmd->parsed())
      return cmd_train(data_dir, config_path, ckpt_path, embeddings_path, seed,
                       seed_opt->count() > 0);
    if (eval_cmd->parsed())
      return cmd_eval(data_dir, ckpt_path, split, no_marginalize);
    if (oracle_cmd->parsed())
      return cmd_oracle_check(trials, max_nodes, max_regions, seed);
    if (grad_cmd->parsed()) return cmd_grad_check(instances, seed, h);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
