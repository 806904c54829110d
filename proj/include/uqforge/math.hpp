#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace uqforge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454836;

// log(sum(exp(v))) with -inf entries contributing nothing.
inline double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) {
    if (x > m) m = x;
  }
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) {
    if (x != kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}

inline double logsumexp(const std::vector<double>& v) {
  return logsumexp(std::span<const double>(v));
}

// Lower-triangular Cholesky factor; throws DecompositionError upstream via
// the .info() check at call sites that need a friendly message.
inline Eigen::LLT<Matrix> cholesky(const Matrix& spd) { return Eigen::LLT<Matrix>(spd); }

// Linearly interpolated quantile of a sorted vector, p in [0, 1].
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace uqforge
