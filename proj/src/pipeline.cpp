#include "jvg/pipeline.hpp"

#include <stdexcept>

#include "jvg/numeric.hpp"

namespace jvg {

namespace {

int referent_index(const SceneGraph& graph) {
  for (int i = 0; i < graph.node_count(); ++i)
    if (graph.nodes[i].id == graph.referent) return i;
  throw std::invalid_argument("pipeline: referent id not found in graph");
}

}  // namespace

void forward_example(const Scene& scene, const SceneGraph& graph,
                     const Vocabulary& vocab, const ModelParams& params,
                     const PipelineOptions& opts, PipelineForward& fwd) {
  const int m = graph.node_count();
  const int n = scene.size();
  const int ref = referent_index(graph);
  fwd.marginalized = opts.marginalize;

  fwd.feats = region_features(scene, params);
  fwd.unary_h = unary_hidden(fwd.feats.x, params);

  fwd.node_spans.clear();
  fwd.node_enc.clear();
  fwd.unary_caches.assign(m, {});
  fwd.log_unary.resize(m, n);
  for (int v = 0; v < m; ++v) {
    fwd.node_spans.push_back(node_span(graph.nodes[v], vocab));
    fwd.node_enc.push_back(encode_phrase(fwd.node_spans[v], params));
    unary_row(fwd.unary_h, fwd.node_enc[v], params, &fwd.unary_caches[v]);
    fwd.log_unary.row(v) = fwd.unary_caches[v].log_row.transpose();
  }

  if (!opts.marginalize) {
    // unary rows double as the marginals
    fwd.result.marginals = fwd.log_unary.array().exp().matrix();
    fwd.result.groundings = ground(fwd.result.marginals);
    fwd.result.referent = ref;
    fwd.result.log_partition = 0;
    return;
  }

  fwd.bin_h = binary_hidden(fwd.feats.x, params);
  fwd.edge_spans.clear();
  fwd.edge_enc.clear();
  fwd.binary_caches.assign(graph.edges.size(), {});
  std::vector<Mat> log_tables(graph.edges.size());
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    fwd.edge_spans.push_back(edge_span(graph.edges[e], vocab));
    fwd.edge_enc.push_back(encode_phrase(fwd.edge_spans[e], params));
    binary_table(fwd.bin_h, fwd.edge_enc[e], params, &fwd.binary_caches[e]);
    log_tables[e] = fwd.binary_caches[e].log_table;
  }

  fwd.fg = build_factor_graph_log(graph, fwd.log_unary, log_tables);
  fwd.result = run_belief_propagation(fwd.fg, &fwd.run);
}

GroundingResult ground_example(const Scene& scene, const SceneGraph& graph,
                               const Vocabulary& vocab, const ModelParams& params,
                               const PipelineOptions& opts) {
  PipelineForward fwd;
  forward_example(scene, graph, vocab, params, opts, fwd);
  return fwd.result;
}

Scalar example_loss(const Scene& scene, const SceneGraph& graph,
                    const Target& target, const Vocabulary& vocab,
                    const ModelParams& params, const PipelineOptions& opts) {
  PipelineForward fwd;
  forward_example(scene, graph, vocab, params, opts, fwd);
  const int ref = fwd.result.referent;
  Vec log_row;
  if (opts.marginalize)
    log_row = log_softmax(Vec(fwd.run.beliefs.row(ref).transpose()));
  else
    log_row = fwd.log_unary.row(ref).transpose();
  return loss_from_log_row(log_row, target);
}

Scalar example_loss_grad(const Scene& scene, const SceneGraph& graph,
                         const Target& target, const Vocabulary& vocab,
                         const ModelParams& params, const PipelineOptions& opts,
                         Vec& grad) {
  if (grad.size() != params.flat.size())
    throw std::invalid_argument("example_loss_grad: gradient size mismatch");
  PipelineForward fwd;
  forward_example(scene, graph, vocab, params, opts, fwd);

  const int m = graph.node_count();
  const int n = scene.size();
  const int ref = fwd.result.referent;

  // loss and the adjoint of the referent's log marginal row
  Vec log_row;
  if (opts.marginalize)
    log_row = log_softmax(Vec(fwd.run.beliefs.row(ref).transpose()));
  else
    log_row = fwd.log_unary.row(ref).transpose();
  const Scalar loss_value = loss_from_log_row(log_row, target);
  const Vec d_log_row = loss_backward_log_row(log_row, target);

  // adjoints of the log potential tables
  Mat d_log_unary;
  std::vector<Mat> d_log_tables;
  if (opts.marginalize) {
    Mat d_log_marg = Mat::Zero(m, n);
    d_log_marg.row(ref) = d_log_row.transpose();
    BpGradients bg = bp_backward(fwd.fg, fwd.run, d_log_marg);
    d_log_unary = std::move(bg.d_log_unary);
    d_log_tables = std::move(bg.d_log_tables);
  } else {
    d_log_unary = Mat::Zero(m, n);
    d_log_unary.row(ref) = d_log_row.transpose();
  }

  // unary nets and node encodings
  Mat d_hidden = Mat::Zero(params.cfg.phrase_dim, n);
  Mat d_x = Mat::Zero(params.cfg.region_dim(), n);
  for (int v = 0; v < m; ++v) {
    const Vec d_row = d_log_unary.row(v).transpose();
    if (d_row.isZero(0)) continue;
    Vec d_enc = Vec::Zero(params.cfg.phrase_dim);
    unary_row_backward(fwd.unary_h, fwd.node_enc[v], params, fwd.unary_caches[v],
                       d_row, grad, d_enc, d_hidden);
    encode_phrase_backward(fwd.node_spans[v], params, d_enc, grad);
  }
  unary_hidden_backward(fwd.feats.x, params, d_hidden, grad, d_x);

  // binary nets and edge encodings
  if (opts.marginalize && !graph.edges.empty()) {
    BinaryHidden d_bin;
    d_bin.left = Mat::Zero(params.cfg.phrase_dim, n);
    d_bin.right = Mat::Zero(params.cfg.phrase_dim, n);
    bool any = false;
    for (size_t e = 0; e < graph.edges.size(); ++e) {
      if (d_log_tables[e].isZero(0)) continue;
      any = true;
      Vec d_enc = Vec::Zero(params.cfg.phrase_dim);
      binary_table_backward(fwd.bin_h, fwd.edge_enc[e], params,
                            fwd.binary_caches[e], d_log_tables[e], grad, d_enc,
                            d_bin);
      encode_phrase_backward(fwd.edge_spans[e], params, d_enc, grad);
    }
    if (any) binary_hidden_backward(fwd.feats.x, params, d_bin, grad, d_x);
  }

  region_features_backward(fwd.feats, params, d_x, grad);
  return loss_value;
}

Vec gradients(const Scene& scene, const SceneGraph& graph, const Target& target,
              const Vocabulary& vocab, const ModelParams& params,
              const PipelineOptions& opts) {
  Vec grad = Vec::Zero(params.flat.size());
  example_loss_grad(scene, graph, target, vocab, params, opts, grad);
  return grad;
}

}  // namespace jvg
