#include "jvg/loss.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace jvg {

Scalar loss_from_log_row(const Vec& log_row, const Target& target) {
  if (std::holds_alternative<int>(target)) {
    const int gt = std::get<int>(target);
    if (gt < 0 || gt >= log_row.size())
      throw std::out_of_range("loss: ground-truth region index out of range");
    return -log_row[gt];
  }
  const SoftLabel& soft = std::get<SoftLabel>(target);
  const Index n = log_row.size();
  if (soft.probs.size() != n)
    throw std::invalid_argument("loss: soft label size mismatch");
  // softmax marginals cannot put zero mass on a support point
  assert(log_row.allFinite());
  Scalar sum = 0;
  for (Index i = 0; i < n; ++i)
    sum += soft.probs[i] * (std::log(soft.probs[i]) - log_row[i]);
  return sum / static_cast<Scalar>(n);
}

Vec loss_backward_log_row(const Vec& log_row, const Target& target) {
  Vec d = Vec::Zero(log_row.size());
  if (std::holds_alternative<int>(target)) {
    d[std::get<int>(target)] = -1;
    return d;
  }
  const SoftLabel& soft = std::get<SoftLabel>(target);
  d = -soft.probs / static_cast<Scalar>(log_row.size());
  return d;
}

Scalar loss(const GroundingResult& result, const Target& target) {
  const Index ref = result.referent;
  const Vec log_row =
      result.marginals.row(ref).array().log().matrix().transpose();
  return loss_from_log_row(log_row, target);
}

}  // namespace jvg
