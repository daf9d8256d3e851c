#pragma once

#include <algorithm>
#include <vector>

#include "gptopt/core/objective.hpp"

namespace gptopt {

struct PatternSearchOptions {
  double initial_step = 0.1;
  double min_step = 1e-4;
  int max_evals = 400;
};

struct PatternSearchResult {
  Point x;
  double value;
  int evals = 0;
};

/// Compass search maximizing `f` on [-1,1]^d. Coordinates are polled in order,
/// +step before -step; the first improving move is taken and the step halves
/// after an unsuccessful sweep.
template <typename F>
PatternSearchResult pattern_search_max(F&& f, Point x, double fx, const PatternSearchOptions& opt = {}) {
  double step = opt.initial_step;
  int evals = 0;
  const std::size_t d = x.size();
  while (step >= opt.min_step && evals < opt.max_evals) {
    bool improved = false;
    for (std::size_t j = 0; j < d && evals < opt.max_evals; ++j) {
      for (double dir : {1.0, -1.0}) {
        Point y = x;
        y[j] = std::clamp(y[j] + dir * step, -1.0, 1.0);
        if (y[j] == x[j]) continue;
        const double fy = f(y);
        ++evals;
        if (fy > fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {std::move(x), fx, evals};
}

}  // namespace gptopt
