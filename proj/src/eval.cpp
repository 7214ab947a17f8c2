#include "jvg/eval.hpp"

#include "jvg/soft_label.hpp"

namespace jvg {

bool grounding_correct(const Example& ex, int node_index, int region) {
  const int gt = ex.gt_regions[node_index];
  if (ex.setting == "gt") return region == gt;
  return iou(ex.scene.regions[region].box, ex.scene.regions[gt].box) > 0.5;
}

Metrics evaluate(const std::vector<Example>& examples, const Vocabulary& vocab,
                 const ModelParams& params, const EvalOptions& opts) {
  Metrics m;
  int referent_hits = 0, supporting_hits = 0;
  PipelineOptions popts;
  popts.marginalize = opts.marginalize;
  for (const auto& ex : examples) {
    const GroundingResult r =
        ground_example(ex.scene, ex.graph, vocab, params, popts);
    const int ref = ex.referent_index();
    if (grounding_correct(ex, ref, r.groundings[ref])) ++referent_hits;
    for (int v = 0; v < ex.graph.node_count(); ++v) {
      if (v == ref) continue;
      ++m.supporting_nodes;
      if (grounding_correct(ex, v, r.groundings[v])) ++supporting_hits;
    }
  }
  m.examples = static_cast<int>(examples.size());
  m.referent_acc =
      m.examples > 0 ? static_cast<Scalar>(referent_hits) / m.examples : 0;
  m.supporting_acc = m.supporting_nodes > 0
                         ? static_cast<Scalar>(supporting_hits) / m.supporting_nodes
                         : 0;
  return m;
}

}  // namespace jvg
