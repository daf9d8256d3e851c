#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace gptopt::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline double pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrt2Pi); }

inline double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

inline double cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

/// Scaled complementary error function exp(x^2) * erfc(x), for x >= 0.
///
/// The square is split into hi + lo with an FMA so exp(x^2) carries no
/// argument-rounding error; beyond x = 26 exp(x^2) would overflow and the
/// asymptotic series is accurate to well below machine precision.
inline double erfcx(double x) {
  if (x < 26.0) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * std::erfc(x) * (1.0 + lo);
  }
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv2x2;
    sum += term;
  }
  return sum / (x * std::sqrt(std::numbers::pi));
}

/// log(1 - exp(a)) for a < 0.
inline double log1mexp(double a) {
  if (a > -std::numbers::ln2) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

/// log(phi(z) + z * Phi(z)), the log of the standardized expected improvement.
///
/// Direct evaluation for z > -1. Below that the sum cancels, so it is
/// rewritten as log phi(z) + log(1 - |z| * Mills(z)) with the Mills ratio
/// expressed through erfcx. Past -1/sqrt(eps) the leading asymptotic term is
/// exact to double precision.
inline double log_h(double z) {
  if (z > -1.0) return std::log(pdf(z) + z * cdf(z));
  static const double kAsymptotic = -1.0 / std::sqrt(std::numeric_limits<double>::epsilon());
  if (z <= kAsymptotic) return -0.5 * z * z - kLogSqrt2Pi - 2.0 * std::log(-z);
  constexpr double kHalfLogPiOver2 = 0.22579135264472743236;  // 0.5*log(pi/2)
  const double log_mills = std::log(-z) + std::log(erfcx(-z * kInvSqrt2)) + kHalfLogPiOver2;
  return log_pdf(z) + log1mexp(log_mills);
}

}  // namespace gptopt::normal
