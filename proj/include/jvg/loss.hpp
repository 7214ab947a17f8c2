#pragma once

#include <variant>

#include "jvg/belief_prop.hpp"
#include "jvg/soft_label.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Supervision of the referent node: a ground-truth region index in the
// gt setting, a soft IoU-derived distribution in the det setting.
using Target = std::variant<int, SoftLabel>;

// Loss on the referent's log marginal row. gt: -log P(gt index).
// det: (1/N) sum_i p*_i log(p*_i / P_i).
Scalar loss_from_log_row(const Vec& log_row, const Target& target);

// Adjoint of the log marginal row for the loss above.
Vec loss_backward_log_row(const Vec& log_row, const Target& target);

// Operation form over a finished grounding result.
Scalar loss(const GroundingResult& result, const Target& target);

}  // namespace jvg
