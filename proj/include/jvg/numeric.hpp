#pragma once

#include <cmath>
#include <limits>

#include "jvg/types.hpp"

namespace jvg {

// log(sum(exp(v))) with max subtraction. Tolerates -inf entries; returns
// -inf when every entry is -inf.
template <typename Derived>
Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

template <typename Derived>
Vec softmax(const Eigen::MatrixBase<Derived>& v) {
  const Scalar m = v.maxCoeff();
  Vec e = (v.array() - m).exp().matrix();
  return e / e.sum();
}

template <typename Derived>
Vec log_softmax(const Eigen::MatrixBase<Derived>& v) {
  return (v.array() - log_sum_exp(v)).matrix();
}

// Pullback through y = softmax(x): dx = y .* (dy - <y, dy>).
inline Vec softmax_backward(const Vec& y, const Vec& dy) {
  return (y.array() * (dy.array() - y.dot(dy))).matrix();
}

// Pullback through y = log_softmax(x): dx = dy - softmax(x) * sum(dy).
inline Vec log_softmax_backward(const Vec& y_log, const Vec& dy) {
  return (dy.array() - y_log.array().exp() * dy.sum()).matrix();
}

// L2 normalization with the zero vector mapped to itself.
inline Vec l2_normalize(const Vec& x) {
  const Scalar n = x.norm();
  if (n == Scalar(0)) return Vec::Zero(x.size());
  return x / n;
}

// Pullback through y = x / |x|: dx = (dy - y <y, dy>) / |x|, zero at x = 0.
inline Vec l2_normalize_backward(const Vec& x, const Vec& dy) {
  const Scalar n = x.norm();
  if (n == Scalar(0)) return Vec::Zero(x.size());
  const Vec y = x / n;
  return (dy - y * y.dot(dy)) / n;
}

}  // namespace jvg
