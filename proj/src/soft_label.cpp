#include "jvg/soft_label.hpp"

#include <algorithm>
#include <stdexcept>

#include "jvg/numeric.hpp"

namespace jvg {

Scalar iou(const Box& a, const Box& b) {
  const Scalar area_a = (a[2] - a[0]) * (a[3] - a[1]);
  const Scalar area_b = (b[2] - b[0]) * (b[3] - b[1]);
  if (area_a <= 0 || area_b <= 0)
    throw std::invalid_argument("iou: degenerate box");
  const Scalar iw =
      std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const Scalar ih =
      std::min(a[3], b[3]) - std::max(a[1], b[1]);
  if (iw <= 0 || ih <= 0) return 0;
  const Scalar inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

SoftLabel make_soft_labels(const Scene& scene, const Box& gt_box, Scalar eta) {
  const int n = scene.size();
  if (n < 1) throw std::invalid_argument("make_soft_labels: empty scene");
  Vec scores(n);
  for (int i = 0; i < n; ++i)
    scores[i] = std::max(Scalar(0), iou(scene.regions[i].box, gt_box) - eta);
  SoftLabel out;
  out.eta = eta;
  out.probs = softmax(scores);
  return out;
}

}  // namespace jvg
