#include "jvg/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace jvg {

namespace {

// Kahan-compensated accumulator
struct Accum {
  Scalar sum = 0, c = 0;
  void add(Scalar v) {
    const Scalar y = v - c;
    const Scalar t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

Scalar joint_probability(const FactorGraph& fg, const std::vector<int>& assignment) {
  if (static_cast<int>(assignment.size()) != fg.num_vars)
    throw std::invalid_argument("joint_probability: assignment length mismatch");
  for (int a : assignment)
    if (a < 0 || a >= fg.domain)
      throw std::out_of_range("joint_probability: region index out of range");
  Scalar p = 1;
  for (int v = 0; v < fg.num_vars; ++v)
    p *= std::exp(fg.log_unary(v, assignment[v]));
  for (const auto& bf : fg.binaries)
    p *= std::exp(bf.log_table(assignment[bf.subject], assignment[bf.object]));
  return p;
}

OracleResult brute_force(const FactorGraph& fg,
                         const std::vector<std::pair<int, int>>& clamps,
                         std::uint64_t cap) {
  const int m = fg.num_vars;
  const int n = fg.domain;
  std::uint64_t total = 1;
  for (int v = 0; v < m; ++v) {
    if (total > cap / static_cast<std::uint64_t>(n))
      throw std::runtime_error("brute_force: enumeration cap exceeded");
    total *= static_cast<std::uint64_t>(n);
  }

  std::vector<int> clamp_of(m, -1);
  for (auto [var, value] : clamps) {
    if (var < 0 || var >= m || value < 0 || value >= n)
      throw std::invalid_argument("brute_force: bad clamp");
    clamp_of[var] = value;
  }

  std::vector<std::vector<Accum>> sums(m, std::vector<Accum>(n));
  Accum z;
  std::vector<int> assign(m, 0);
  for (int v = 0; v < m; ++v)
    if (clamp_of[v] >= 0) assign[v] = clamp_of[v];

  while (true) {
    const Scalar p = joint_probability(fg, assign);
    z.add(p);
    for (int v = 0; v < m; ++v) sums[v][assign[v]].add(p);

    // odometer over unclamped variables
    int v = m - 1;
    while (v >= 0) {
      if (clamp_of[v] >= 0) {
        --v;
        continue;
      }
      if (++assign[v] < n) break;
      assign[v] = 0;
      --v;
    }
    if (v < 0) break;
  }

  if (z.sum <= 0)
    throw std::runtime_error("brute_force: zero normalization constant");
  OracleResult out;
  out.z = z.sum;
  out.marginals.resize(m, n);
  for (int v = 0; v < m; ++v)
    for (int i = 0; i < n; ++i) out.marginals(v, i) = sums[v][i].sum / z.sum;
  return out;
}

Mat brute_force_marginals(const FactorGraph& fg, std::uint64_t cap) {
  return brute_force(fg, {}, cap).marginals;
}

}  // namespace jvg
