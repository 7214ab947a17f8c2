#include "jvg/grad_check.hpp"

#include <cmath>

namespace jvg {

GradCheckResult finite_difference_check(const Scene& scene,
                                        const SceneGraph& graph,
                                        const Target& target,
                                        const Vocabulary& vocab,
                                        const ModelParams& params,
                                        const PipelineOptions& opts, Scalar h,
                                        Scalar floor) {
  const Vec analytic = gradients(scene, graph, target, vocab, params, opts);
  ModelParams probe = params;
  GradCheckResult out;
  for (Index k = 0; k < params.flat.size(); ++k) {
    const Scalar saved = probe.flat[k];
    probe.flat[k] = saved + h;
    const Scalar up = example_loss(scene, graph, target, vocab, probe, opts);
    probe.flat[k] = saved - h;
    const Scalar down = example_loss(scene, graph, target, vocab, probe, opts);
    probe.flat[k] = saved;
    const Scalar fd = (up - down) / (2 * h);
    const Scalar denom =
        std::max({std::abs(analytic[k]), std::abs(fd), floor});
    const Scalar rel = std::abs(analytic[k] - fd) / denom;
    if (rel > out.max_rel_err) {
      out.max_rel_err = rel;
      out.worst_param = k;
      out.analytic = analytic[k];
      out.numeric = fd;
    }
  }
  return out;
}

}  // namespace jvg
