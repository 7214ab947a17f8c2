#pragma once

#include "jvg/scene.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Intersection over union; 0 for disjoint boxes. Throws on zero-area boxes.
Scalar iou(const Box& a, const Box& b);

// Probability target for the detection setting: softmax over regions of
// max(0, IoU(b_i, gt) - eta).
struct SoftLabel {
  Vec probs;          // over regions, sums to 1
  Scalar eta = 0.5;
};

SoftLabel make_soft_labels(const Scene& scene, const Box& gt_box,
                           Scalar eta = 0.5);

}  // namespace jvg
