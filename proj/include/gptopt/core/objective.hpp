#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gptopt {

using Point = std::vector<double>;

/// A minimization target over the unit domain [-1,1]^dim.
///
/// Synthetic functions and unit-domain benchmark wrappers both convert to this
/// type; optimizers and the harness only ever see an Objective.
struct Objective {
  std::string id;
  int dim = 0;
  std::function<double(std::span<const double>)> fn;
  /// Known global minimum, when the function has one (benchmarks).
  std::optional<double> f_star;

  double operator()(std::span<const double> x) const { return fn(x); }
};

}  // namespace gptopt
