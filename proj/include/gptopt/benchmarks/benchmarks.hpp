#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"

namespace gptopt::benchmarks {

/// Classical test function on its native box with a known global minimum.
struct BenchmarkFunction {
  std::string name;
  int dim = 0;
  std::vector<std::pair<double, double>> bounds;
  double f_star = 0.0;
  /// One known minimizer in native coordinates.
  std::vector<double> argmin;
  std::function<double(std::span<const double>)> evaluate;

  std::string id() const { return name + "-d" + std::to_string(dim); }

  double operator()(std::span<const double> x) const { return evaluate(x); }

  std::vector<double> to_native(std::span<const double> u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto [lo, hi] = bounds[i];
      x[i] = lo + 0.5 * (u[i] + 1.0) * (hi - lo);
    }
    return x;
  }

  std::vector<double> to_unit(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto [lo, hi] = bounds[i];
      u[i] = 2.0 * (x[i] - lo) / (hi - lo) - 1.0;
    }
    return u;
  }
};

/// Objective over [-1,1]^d evaluating `bench` at the affinely mapped native point.
inline Objective to_unit_domain(const BenchmarkFunction& bench) {
  return Objective{bench.id(), bench.dim,
                   [bench](std::span<const double> u) {
                     const auto x = bench.to_native(u);
                     return bench.evaluate(x);
                   },
                   bench.f_star};
}

namespace detail {

inline constexpr double kPi = std::numbers::pi;

inline double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    s += 100.0 * a * a + b * b;
  }
  return s;
}

inline double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * kPi * v);
  return s;
}

inline double ackley(std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double sq = 0.0, cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(2.0 * kPi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + std::numbers::e;
}

inline double griewank(std::span<const double> x) {
  double s = 0.0, p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += x[i] * x[i] / 4000.0;
    p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return s - p + 1.0;
}

inline double levy(std::span<const double> x) {
  const std::size_t d = x.size();
  auto w = [&](std::size_t i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  const double s1 = std::sin(kPi * w(0));
  double s = s1 * s1;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    const double t = std::sin(kPi * wi + 1.0);
    s += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * t * t);
  }
  const double wd = w(d - 1);
  const double t = std::sin(2.0 * kPi * wd);
  return s + (wd - 1.0) * (wd - 1.0) * (1.0 + t * t);
}

inline double styblinski_tang(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v * v * v - 16.0 * v * v + 5.0 * v;
  return 0.5 * s;
}

inline double branin(std::span<const double> x) {
  const double b = 5.1 / (4.0 * kPi * kPi), c = 5.0 / kPi, t = 1.0 / (8.0 * kPi);
  const double a = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return a * a + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

inline constexpr std::array<double, 4> kHartmannAlpha = {1.0, 1.2, 3.0, 3.2};

inline double hartmann3(std::span<const double> x) {
  static constexpr double a[4][3] = {{3, 10, 30}, {0.1, 10, 35}, {3, 10, 30}, {0.1, 10, 35}};
  static constexpr double p[4][3] = {
      {0.3689, 0.1170, 0.2673}, {0.4699, 0.4387, 0.7470}, {0.1091, 0.8732, 0.5547}, {0.0381, 0.5743, 0.8828}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j) e += a[i][j] * (x[j] - p[i][j]) * (x[j] - p[i][j]);
    s += kHartmannAlpha[i] * std::exp(-e);
  }
  return -s;
}

inline double hartmann6(std::span<const double> x) {
  static constexpr double a[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                     {0.05, 10, 17, 0.1, 8, 14},
                                     {3, 3.5, 1.7, 10, 17, 8},
                                     {17, 8, 0.05, 10, 0.1, 14}};
  static constexpr double p[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                     {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                     {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                     {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) e += a[i][j] * (x[j] - p[i][j]) * (x[j] - p[i][j]);
    s += kHartmannAlpha[i] * std::exp(-e);
  }
  return -s;
}

inline double michalewicz(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += std::sin(x[i]) * std::pow(std::sin(static_cast<double>(i + 1) * x[i] * x[i] / kPi), 20.0);
  return -s;
}

// Michalewicz (m = 10) is separable; entry d-1 is the sum of the exact 1-D minima.
inline constexpr std::array<double, 10> kMichalewiczFStar = {
    -0.80130341009855266, -1.8013034100985528, -2.7603946799945578, -3.6988570984666422, -4.6876581790881477,
    -5.6876581790881477, -6.680885314444029,  -7.6637573507162404, -8.6601517156413443, -9.6601517156413443};

// 1-D minimizers of the Michalewicz terms, used as argmin coordinates.
inline constexpr std::array<double, 10> kMichalewiczArgmin = {
    2.202905520171603, 1.570796326794897, 1.284991570549411, 1.923058469865439, 1.720469772565858,
    1.570796326794897, 1.454413971361704, 1.756086520944153, 1.655717416820785, 1.570796326794897};

inline constexpr double kStyblinskiTangFStarPerDim = -39.166165703771426;
inline constexpr double kStyblinskiTangArgmin = -2.9035340276126953;

}  // namespace detail

struct RegistryEntry {
  std::string name;
  int min_dim, max_dim;
};

/// Names and supported dimensions; dimension-generic functions are listed for 2..10.
inline const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> r = {
      {"sphere", 2, 10},   {"rosenbrock", 2, 10},      {"rastrigin", 2, 10}, {"ackley", 2, 10},
      {"griewank", 2, 10}, {"levy", 2, 10},            {"styblinski_tang", 2, 10},
      {"branin", 2, 2},    {"hartmann", 3, 3},         {"hartmann", 6, 6},   {"michalewicz", 2, 10}};
  return r;
}

inline BenchmarkFunction load_benchmark(const std::string& name, int dim) {
  bool known = false;
  for (const auto& e : registry())
    if (e.name == name && dim >= e.min_dim && dim <= e.max_dim) known = true;
  if (!known) throw RegistryError("unknown benchmark '" + name + "' in dimension " + std::to_string(dim));

  const auto d = static_cast<std::size_t>(dim);
  auto uniform_box = [&](double lo, double hi) { return std::vector<std::pair<double, double>>(d, {lo, hi}); };
  BenchmarkFunction b;
  b.name = name;
  b.dim = dim;
  if (name == "sphere") {
    b.bounds = uniform_box(-5.12, 5.12);
    b.argmin.assign(d, 0.0);
    b.evaluate = detail::sphere;
  } else if (name == "rosenbrock") {
    b.bounds = uniform_box(-5.0, 10.0);
    b.argmin.assign(d, 1.0);
    b.evaluate = detail::rosenbrock;
  } else if (name == "rastrigin") {
    b.bounds = uniform_box(-5.12, 5.12);
    b.argmin.assign(d, 0.0);
    b.evaluate = detail::rastrigin;
  } else if (name == "ackley") {
    b.bounds = uniform_box(-32.768, 32.768);
    b.argmin.assign(d, 0.0);
    b.evaluate = detail::ackley;
  } else if (name == "griewank") {
    b.bounds = uniform_box(-600.0, 600.0);
    b.argmin.assign(d, 0.0);
    b.evaluate = detail::griewank;
  } else if (name == "levy") {
    b.bounds = uniform_box(-10.0, 10.0);
    b.argmin.assign(d, 1.0);
    b.evaluate = detail::levy;
  } else if (name == "styblinski_tang") {
    b.bounds = uniform_box(-5.0, 5.0);
    b.argmin.assign(d, detail::kStyblinskiTangArgmin);
    b.f_star = detail::kStyblinskiTangFStarPerDim * dim;
    b.evaluate = detail::styblinski_tang;
  } else if (name == "branin") {
    b.bounds = {{-5.0, 10.0}, {0.0, 15.0}};
    b.argmin = {std::numbers::pi, 2.275};
    b.f_star = 0.39788735772973816;
    b.evaluate = detail::branin;
  } else if (name == "hartmann" && dim == 3) {
    b.bounds = uniform_box(0.0, 1.0);
    b.argmin = {0.114614, 0.555649, 0.852547};
    b.f_star = -3.8627797873326628;
    b.evaluate = detail::hartmann3;
  } else if (name == "hartmann" && dim == 6) {
    b.bounds = uniform_box(0.0, 1.0);
    b.argmin = {0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573};
    b.f_star = -3.3223680114155152;
    b.evaluate = detail::hartmann6;
  } else if (name == "michalewicz") {
    b.bounds = uniform_box(0.0, std::numbers::pi);
    b.argmin.assign(detail::kMichalewiczArgmin.begin(), detail::kMichalewiczArgmin.begin() + dim);
    b.f_star = detail::kMichalewiczFStar[d - 1];
    b.evaluate = detail::michalewicz;
  }
  return b;
}

}  // namespace gptopt::benchmarks
