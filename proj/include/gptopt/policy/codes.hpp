#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/dataset/discretize.hpp"

namespace gptopt::policy {

inline constexpr int kNumCodes = 1000;
inline constexpr double kDistTolerance = 1e-6;

struct InferenceConfig {
  int k_proposals = 4;
  double temperature = 1.5;
  int c_min_start = 500;
  int c_min_end = 100;
  /// Optimization budget T.
  int budget = 40;
  double timeout_seconds = 60.0;

  void validate() const {
    std::vector<std::string> problems;
    if (k_proposals < 1) problems.push_back("k_proposals: must be >= 1");
    if (!(temperature > 0.0)) problems.push_back("temperature: must be > 0");
    if (!(c_min_start > c_min_end && c_min_end >= 0)) problems.push_back("c_min: need start > end >= 0");
    if (c_min_start > dataset::kMaxCode) problems.push_back("c_min_start: must be <= 999");
    if (budget < 0) problems.push_back("budget: must be >= 0");
    if (!(timeout_seconds > 0.0)) problems.push_back("timeout_seconds: must be > 0");
    if (!problems.empty()) {
      std::string msg = "invalid inference config:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }
};

/// round(start - (start - end) * t / T); T = 0 yields start.
inline int c_min(int t, int T, int start = 500, int end = 100) {
  if (T <= 0) return start;
  return dataset::round_half_up(start - static_cast<double>(start - end) * t / T);
}

/// Observed max -> 999, observed min -> C_min(t), linear in between.
/// A single distinct value maps to 999.
inline std::vector<int> inference_objective_codes(std::span<const double> values, int t, int T, int start = 500,
                                                  int end = 100) {
  if (values.empty()) throw ConfigError("need at least one observed value");
  const int lo_code = c_min(t, T, start, end);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<int> codes(values.size(), dataset::kMaxCode);
  if (!(hi > lo)) return codes;
  for (std::size_t i = 0; i < values.size(); ++i)
    codes[i] = std::clamp(dataset::round_half_up(lo_code + (values[i] - lo) / (hi - lo) * (dataset::kMaxCode - lo_code)),
                          0, dataset::kMaxCode);
  return codes;
}

/// Code of `v` on the scale fixed by `values`, extrapolated and clamped to [0, 999].
inline int code_on_scale(double v, std::span<const double> values, int t, int T, int start = 500, int end = 100) {
  const int lo_code = c_min(t, T, start, end);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return v < lo ? lo_code : dataset::kMaxCode;
  return std::clamp(dataset::round_half_up(lo_code + (v - lo) / (hi - lo) * (dataset::kMaxCode - lo_code)), 0,
                    dataset::kMaxCode);
}

/// Probability over the 1000 objective codes.
using ObjectiveDist = std::vector<double>;

inline ObjectiveDist point_mass(int code) {
  ObjectiveDist d(kNumCodes, 0.0);
  d[static_cast<std::size_t>(code)] = 1.0;
  return d;
}

inline ObjectiveDist uniform_dist() { return ObjectiveDist(kNumCodes, 1.0 / kNumCodes); }

/// Empty string if `dist` is a valid distribution, otherwise the reason.
inline std::string check_dist(std::span<const double> dist) {
  if (dist.size() != kNumCodes)
    return "distribution has " + std::to_string(dist.size()) + " entries, expected " + std::to_string(kNumCodes);
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) return "distribution has a negative or non-finite entry";
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistTolerance) return "distribution sums to " + std::to_string(sum);
  return {};
}

/// Expand {codes, probs} with implicit zeros. Duplicate codes accumulate.
/// The result is renormalized when the given mass is within tolerance of 1.
inline ObjectiveDist expand_sparse(std::span<const int> codes, std::span<const double> probs) {
  if (codes.size() != probs.size()) throw InferenceError("sparse distribution has mismatched codes and probs");
  ObjectiveDist d(kNumCodes, 0.0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] < 0 || codes[i] >= kNumCodes)
      throw InferenceError("sparse distribution code " + std::to_string(codes[i]) + " out of range");
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) throw InferenceError("sparse distribution has invalid probability");
    d[static_cast<std::size_t>(codes[i])] += probs[i];
  }
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  if (std::abs(sum - 1.0) > kDistTolerance) throw InferenceError("sparse distribution sums to " + std::to_string(sum));
  for (double& p : d) p /= sum;
  return d;
}

inline double dist_mean(std::span<const double> dist) {
  double m = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) m += static_cast<double>(s) * dist[s];
  return m;
}

/// sum_s dist[s] * max(0, incumbent - s).
inline double discrete_expected_improvement(std::span<const double> dist, int incumbent_code) {
  double ei = 0.0;
  const auto upto = static_cast<std::size_t>(std::clamp(incumbent_code, 0, static_cast<int>(dist.size())));
  for (std::size_t s = 0; s < upto; ++s) ei += dist[s] * static_cast<double>(incumbent_code - static_cast<int>(s));
  return ei;
}

struct PolicyProposal {
  std::vector<int> action_codes;
  ObjectiveDist objective_dist;
};

/// Index of the proposal with the largest discrete EI; ties go to the lowest index.
inline std::size_t select_proposal(std::span<const PolicyProposal> proposals, int incumbent_code) {
  if (proposals.empty()) throw InferenceError("select_proposal needs at least one proposal");
  std::size_t best = 0;
  double best_ei = discrete_expected_improvement(proposals[0].objective_dist, incumbent_code);
  for (std::size_t i = 1; i < proposals.size(); ++i) {
    const double ei = discrete_expected_improvement(proposals[i].objective_dist, incumbent_code);
    if (ei > best_ei) {
      best_ei = ei;
      best = i;
    }
  }
  return best;
}

}  // namespace gptopt::policy
