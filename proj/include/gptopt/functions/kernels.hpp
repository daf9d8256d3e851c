#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/random.hpp"

namespace gptopt::functions {

enum class KernelKind { rbf, matern, rational_quadratic, exponential };
enum class Combiner { add, mul };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::matern: return "matern";
    case KernelKind::rational_quadratic: return "rational_quadratic";
    case KernelKind::exponential: return "exponential";
  }
  return "?";
}

inline KernelKind kernel_kind_from_string(std::string_view s) {
  for (auto k : {KernelKind::rbf, KernelKind::matern, KernelKind::rational_quadratic, KernelKind::exponential})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown kernel kind '" + std::string(s) + "'");
}

/// Stationary isotropic kernel on r = |x - y|.
struct BaseKernel {
  KernelKind kind = KernelKind::rbf;
  double lengthscale = 1.0;
  double variance = 1.0;
  double nu = 2.5;     // matern smoothness, 0.5 / 1.5 / 2.5
  double alpha = 1.0;  // rational quadratic shape

  double operator()(double r2) const {
    const double s2 = r2 / (lengthscale * lengthscale);
    switch (kind) {
      case KernelKind::rbf: return variance * std::exp(-0.5 * s2);
      case KernelKind::exponential: return variance * std::exp(-std::sqrt(s2));
      case KernelKind::rational_quadratic: return variance * std::pow(1.0 + s2 / (2.0 * alpha), -alpha);
      case KernelKind::matern: {
        const double s = std::sqrt(s2);
        if (nu < 1.0) return variance * std::exp(-s);
        if (nu < 2.0) {
          const double a = std::sqrt(3.0) * s;
          return variance * (1.0 + a) * std::exp(-a);
        }
        const double a = std::sqrt(5.0) * s;
        return variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
      }
    }
    return 0.0;
  }
};

/// Left fold of up to three base kernels with + / *.
struct CompositeKernel {
  std::vector<BaseKernel> parts;
  std::vector<Combiner> combiners;  // parts.size() - 1

  // Log-uniform bounds for the seeded draws.
  static constexpr double kMinLengthscale = 0.05;
  static constexpr double kMaxLengthscale = 2.0;
  static constexpr double kMinVariance = 0.5;
  static constexpr double kMaxVariance = 2.0;

  double operator()(std::span<const double> x, std::span<const double> y) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      r2 += d * d;
    }
    double acc = parts[0](r2);
    for (std::size_t i = 1; i < parts.size(); ++i)
      acc = combiners[i - 1] == Combiner::add ? acc + parts[i](r2) : acc * parts[i](r2);
    return acc;
  }

  /// k(x, x); all parts are stationary so this is the same everywhere.
  double diagonal() const {
    double acc = parts[0](0.0);
    for (std::size_t i = 1; i < parts.size(); ++i)
      acc = combiners[i - 1] == Combiner::add ? acc + parts[i](0.0) : acc * parts[i](0.0);
    return acc;
  }

  static BaseKernel sample_part(Rng& rng) {
    BaseKernel k;
    k.kind = static_cast<KernelKind>(rng.uniform_int(0, 3));
    k.lengthscale = rng.log_uniform(kMinLengthscale, kMaxLengthscale);
    k.variance = rng.log_uniform(kMinVariance, kMaxVariance);
    static constexpr double kNus[] = {0.5, 1.5, 2.5};
    k.nu = kNus[rng.uniform_int(0, 2)];
    k.alpha = rng.log_uniform(0.1, 10.0);
    return k;
  }

  static CompositeKernel sample(Rng& rng, int n_parts = 0) {
    if (n_parts <= 0) n_parts = rng.uniform_int(1, 3);
    CompositeKernel c;
    for (int i = 0; i < n_parts; ++i) {
      c.parts.push_back(sample_part(rng));
      if (i > 0) c.combiners.push_back(rng.bernoulli(0.5) ? Combiner::add : Combiner::mul);
    }
    return c;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) s += combiners[i - 1] == Combiner::add ? " + " : " * ";
      s += std::string(to_string(parts[i].kind)) + "(l=" + std::to_string(parts[i].lengthscale) + ")";
    }
    return s;
  }
};

}  // namespace gptopt::functions
