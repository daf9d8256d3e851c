#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/bo/gp.hpp"
#include "gptopt/core/errors.hpp"
#include "gptopt/core/normal.hpp"
#include "gptopt/core/pattern_search.hpp"
#include "gptopt/core/random.hpp"

namespace gptopt::bo {

enum class AcqKind { logei, pi, ucb };

/// One acquisition variant. xi applies to logei/pi, kappa to ucb. Both are
/// interpreted in standardized output units.
struct AcquisitionConfig {
  AcqKind kind = AcqKind::logei;
  double xi = 0.0;
  double kappa = 2.576;

  static AcquisitionConfig logei(double xi) { return {AcqKind::logei, xi, 0.0}; }
  static AcquisitionConfig pi(double xi) { return {AcqKind::pi, xi, 0.0}; }
  static AcquisitionConfig ucb(double kappa) { return {AcqKind::ucb, 0.0, kappa}; }

  /// Stable identifier such as "logei_xi=0.01" or "ucb_kappa=2.576".
  std::string id() const {
    char buf[48];
    switch (kind) {
      case AcqKind::logei: std::snprintf(buf, sizeof buf, "logei_xi=%g", xi); break;
      case AcqKind::pi: std::snprintf(buf, sizeof buf, "pi_xi=%g", xi); break;
      case AcqKind::ucb: std::snprintf(buf, sizeof buf, "ucb_kappa=%g", kappa); break;
    }
    return buf;
  }

  static AcquisitionConfig from_id(const std::string& id) {
    auto value_after = [&](std::size_t pos) {
      try {
        return std::stod(id.substr(pos));
      } catch (const std::exception&) {
        throw ConfigError("malformed acquisition id '" + id + "'");
      }
    };
    if (id.rfind("logei_xi=", 0) == 0) return logei(value_after(9));
    if (id.rfind("pi_xi=", 0) == 0) return pi(value_after(6));
    if (id.rfind("ucb_kappa=", 0) == 0) return ucb(value_after(10));
    throw ConfigError("unknown acquisition '" + id + "'");
  }
};

/// The ten-variant grid: LogEI and PI at xi in {0, 0.01, 0.1}, UCB at kappa in {0.1, 1, 2.576, 10}.
inline std::vector<AcquisitionConfig> variant_grid() {
  std::vector<AcquisitionConfig> g;
  for (double xi : {0.0, 0.01, 0.1}) g.push_back(AcquisitionConfig::logei(xi));
  for (double xi : {0.0, 0.01, 0.1}) g.push_back(AcquisitionConfig::pi(xi));
  for (double k : {0.1, 1.0, 2.576, 10.0}) g.push_back(AcquisitionConfig::ucb(k));
  return g;
}

// Closed forms under minimization. `best` is the incumbent (lowest) value.

inline double probability_of_improvement(double mu, double sigma, double best, double xi) {
  if (!(sigma > 0.0)) return mu + xi < best ? 1.0 : 0.0;
  return normal::cdf((best - mu - xi) / sigma);
}

inline double log_expected_improvement(double mu, double sigma, double best, double xi) {
  if (!(sigma > 0.0)) {
    const double gap = best - mu - xi;
    return gap > 0.0 ? std::log(gap) : -std::numeric_limits<double>::infinity();
  }
  return std::log(sigma) + normal::log_h((best - mu - xi) / sigma);
}

/// Larger is better: -mu + kappa * sigma.
inline double ucb_score(double mu, double sigma, double kappa) { return -mu + kappa * sigma; }

inline double acquisition_from_posterior(double mu, double sigma, double best, const AcquisitionConfig& cfg) {
  switch (cfg.kind) {
    case AcqKind::logei: return log_expected_improvement(mu, sigma, best, cfg.xi);
    case AcqKind::pi: return probability_of_improvement(mu, sigma, best, cfg.xi);
    case AcqKind::ucb: return ucb_score(mu, sigma, cfg.kappa);
  }
  return -std::numeric_limits<double>::infinity();
}

/// Acquisition value at x (larger is better). best_y is in original units;
/// the computation runs on the standardized posterior.
inline double acq_value(const GpModel& model, std::span<const double> x, double best_y, const AcquisitionConfig& cfg) {
  const auto [mu, sd] = model.posterior_standardized(x);
  const double v = acquisition_from_posterior(mu, sd, model.to_standardized(best_y), cfg);
  return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

struct AcqMaximizerOptions {
  int candidates_per_dim = 512;
  int local_starts = 10;
  double initial_step = 0.1;
  double min_step = 1e-4;
  int max_evals_per_start = 400;
};

struct AcqMaximum {
  Point x;
  double value = -std::numeric_limits<double>::infinity();
  double best_raw_candidate = -std::numeric_limits<double>::infinity();
};

/// Random multistart + compass pattern search on [-1,1]^d.
inline AcqMaximum maximize_acquisition(const GpModel& model, const AcquisitionConfig& cfg, double best_y,
                                       std::uint64_t seed, const AcqMaximizerOptions& opt = {}) {
  const int d = model.dim();
  const int n = opt.candidates_per_dim * d;
  Rng rng(derive_seed(seed, "acq-candidates"));
  Eigen::MatrixXd cand(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) cand(i, j) = rng.uniform(-1.0, 1.0);
  const double best_s = model.to_standardized(best_y);
  const auto [mu, sd] = model.posterior_standardized(cand);
  std::vector<double> score(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double v = acquisition_from_posterior(mu(i), sd(i), best_s, cfg);
    score[static_cast<std::size_t>(i)] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int starts = std::min(opt.local_starts, n);
  std::partial_sort(order.begin(), order.begin() + starts, order.end(),
                    [&](int a, int b) { return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)]; });

  AcqMaximum out;
  out.x.assign(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) out.x[static_cast<std::size_t>(j)] = cand(order[0], j);
  out.value = score[static_cast<std::size_t>(order[0])];
  out.best_raw_candidate = out.value;

  const PatternSearchOptions ps{opt.initial_step, opt.min_step, opt.max_evals_per_start};
  auto eval = [&](const Point& x) { return acq_value(model, x, best_y, cfg); };
  for (int s = 0; s < starts; ++s) {
    const auto idx = order[static_cast<std::size_t>(s)];
    Point x(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = cand(idx, j);
    auto r = pattern_search_max(eval, std::move(x), score[static_cast<std::size_t>(idx)], ps);
    if (r.value > out.value) {
      out.value = r.value;
      out.x = std::move(r.x);
    }
  }
  return out;
}

}  // namespace gptopt::bo
