#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"

namespace gptopt::dataset {

inline constexpr int kMaxCode = 999;

/// floor(v + 0.5); ties go up.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline int encode_coordinate(double x) {
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("coordinate " + std::to_string(x) + " outside [-1, 1]");
  return round_half_up((x + 1.0) / 2.0 * kMaxCode);
}

/// Center of the bin for `code`, i.e. the exact preimage of the grid point.
inline double decode_coordinate(int code) {
  if (code < 0 || code > kMaxCode) throw DomainError("action code " + std::to_string(code) + " outside [0, 999]");
  return static_cast<double>(code) / kMaxCode * 2.0 - 1.0;
}

inline std::vector<int> discretize_actions(std::span<const double> x) {
  std::vector<int> codes(x.size());
  std::transform(x.begin(), x.end(), codes.begin(), encode_coordinate);
  return codes;
}

inline Point decode_actions(std::span<const int> codes) {
  Point x(codes.size());
  std::transform(codes.begin(), codes.end(), x.begin(), decode_coordinate);
  return x;
}

/// Min maps to 0, max to 999, linear in between. All-equal input maps to 0.
inline std::vector<int> discretize_objectives_train(std::span<const double> values) {
  std::vector<int> codes(values.size(), 0);
  if (values.empty()) return codes;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return codes;
  for (std::size_t i = 0; i < values.size(); ++i)
    codes[i] = std::clamp(round_half_up((values[i] - lo) / (hi - lo) * kMaxCode), 0, kMaxCode);
  return codes;
}

/// Strict running-minimum indicator; the first entry is always true.
inline std::vector<bool> new_best_flags(std::span<const double> values) {
  std::vector<bool> flags(values.size(), false);
  double best = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == 0 || values[i] < best) {
      flags[i] = true;
      best = values[i];
    }
  }
  return flags;
}

}  // namespace gptopt::dataset
