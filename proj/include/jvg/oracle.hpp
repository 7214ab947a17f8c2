#pragma once

#include <cstdint>
#include <vector>

#include "jvg/factor_graph.hpp"
#include "jvg/types.hpp"

namespace jvg {

// Brute-force enumeration of the joint distribution. Ground truth for
// belief propagation and for gradients on small instances; the
// enumeration cap bounds N^M.
struct OracleResult {
  Mat marginals;  // M x N, rows sum to 1
  Scalar z = 0;   // normalization constant
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

// Unnormalized product of all unary and binary potentials at one joint
// assignment (linear domain). Throws on out-of-range indices.
Scalar joint_probability(const FactorGraph& fg, const std::vector<int>& assignment);

// Enumerates every assignment; `clamps` (optional) fixes variables to
// given values, yielding conditional marginals. Throws when N^M exceeds
// the cap.
OracleResult brute_force(const FactorGraph& fg,
                         const std::vector<std::pair<int, int>>& clamps = {},
                         std::uint64_t cap = kDefaultEnumerationCap);

Mat brute_force_marginals(const FactorGraph& fg,
                          std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace jvg
