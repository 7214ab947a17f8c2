#pragma once

#include "jvg/dataset.hpp"
#include "jvg/model.hpp"
#include "jvg/pipeline.hpp"

namespace jvg {

struct GradCheckResult {
  Scalar max_rel_err = 0;
  Index worst_param = -1;
  Scalar analytic = 0;
  Scalar numeric = 0;
};

// Central finite differences against the reverse-mode gradient, swept
// over every parameter. Relative error uses max(|a|, |fd|, floor) in the
// denominator so dead parameters compare cleanly.
GradCheckResult finite_difference_check(const Scene& scene,
                                        const SceneGraph& graph,
                                        const Target& target,
                                        const Vocabulary& vocab,
                                        const ModelParams& params,
                                        const PipelineOptions& opts = {},
                                        Scalar h = 1e-5,
                                        Scalar floor = 1e-6);

}  // namespace jvg
