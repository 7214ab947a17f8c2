#pragma once

#include <vector>

#include "jvg/dataset.hpp"
#include "jvg/model.hpp"
#include "jvg/pipeline.hpp"

namespace jvg {

struct EvalOptions {
  bool marginalize = true;  // false: ground every node by its unary row
};

struct Metrics {
  Scalar referent_acc = 0;
  Scalar supporting_acc = 0;
  int examples = 0;
  int supporting_nodes = 0;
};

// gt setting: a grounding is correct when it hits the exact region index.
// det setting: correct when its box overlaps the ground-truth region's box
// with IoU > 0.5.
bool grounding_correct(const Example& ex, int node_index, int region);

Metrics evaluate(const std::vector<Example>& examples, const Vocabulary& vocab,
                 const ModelParams& params, const EvalOptions& opts = {});

}  // namespace jvg
