#pragma once

#include <vector>

#include "jvg/belief_prop.hpp"
#include "jvg/encoder.hpp"
#include "jvg/loss.hpp"
#include "jvg/model.hpp"
#include "jvg/potentials.hpp"
#include "jvg/scene.hpp"
#include "jvg/scene_graph.hpp"
#include "jvg/vocabulary.hpp"

namespace jvg {

struct PipelineOptions {
  // When false the referent is scored by its unary row alone
  // (the no-marginalization ablation arm).
  bool marginalize = true;
};

// Forward state of one example, kept for the reverse pass.
struct PipelineForward {
  RegionFeatures feats;
  Mat unary_h;  // shared first affine of the unary net, D_w x N
  BinaryHidden bin_h;
  std::vector<PhraseSpan> node_spans;
  std::vector<PhraseSpan> edge_spans;
  std::vector<Vec> node_enc;
  std::vector<Vec> edge_enc;
  std::vector<UnaryCache> unary_caches;
  std::vector<BinaryCache> binary_caches;
  Mat log_unary;  // M x N
  FactorGraph fg;
  BpRun run;
  GroundingResult result;
  bool marginalized = true;
};

// Potentials + belief propagation for one (scene, graph) pair. With
// marginalize=false the marginals are the unary rows themselves.
GroundingResult ground_example(const Scene& scene, const SceneGraph& graph,
                               const Vocabulary& vocab, const ModelParams& params,
                               const PipelineOptions& opts = {});

// Same, but keeps every intermediate needed by the backward pass.
void forward_example(const Scene& scene, const SceneGraph& graph,
                     const Vocabulary& vocab, const ModelParams& params,
                     const PipelineOptions& opts, PipelineForward& fwd);

// Loss of one example plus its gradient, accumulated into `grad`
// (layout of params.flat). Returns the loss.
Scalar example_loss_grad(const Scene& scene, const SceneGraph& graph,
                         const Target& target, const Vocabulary& vocab,
                         const ModelParams& params, const PipelineOptions& opts,
                         Vec& grad);

// Gradient vector over all parameters for one example.
Vec gradients(const Scene& scene, const SceneGraph& graph, const Target& target,
              const Vocabulary& vocab, const ModelParams& params,
              const PipelineOptions& opts = {});

// Forward-only loss (used by finite-difference sweeps).
Scalar example_loss(const Scene& scene, const SceneGraph& graph,
                    const Target& target, const Vocabulary& vocab,
                    const ModelParams& params, const PipelineOptions& opts = {});

}  // namespace jvg
