#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. None of these call the code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gptopt/bo/gp.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/dataset/prompt.hpp"
#include "gptopt/functions/rk4.hpp"
#include "gptopt/functions/synthetic.hpp"
#include "gptopt/policy/codes.hpp"

namespace gptopt::fixtures {

using Big = boost::multiprecision::cpp_bin_float_50;

/// E[max(0, best - mu - xi - sigma Z)] by stratified sampling: draw i lies in
/// the i-th of n equal-probability strata of the standard normal.
inline double mc_expected_improvement(double mu, double sigma, double best, double xi, std::size_t n, std::uint64_t seed) {
  const boost::math::normal_distribution<double> std_normal;
  Rng rng(seed);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + rng.uniform(0.0, 1.0)) / static_cast<double>(n);
    if (u <= 0.0 || u >= 1.0) continue;
    const double z = boost::math::quantile(std_normal, u);
    acc += std::max(0.0, best - xi - (mu + sigma * z));
  }
  return static_cast<double>(acc / static_cast<long double>(n));
}

/// Standard normal cdf in 50-digit arithmetic.
inline double big_cdf(double z) { return static_cast<double>(erfc(-Big(z) / sqrt(Big(2))) / 2); }

/// log(phi(z) + z Phi(z)) in 50-digit arithmetic.
inline double big_log_ei(double z) {
  const Big bz = z;
  const Big pi = boost::math::constants::pi<Big>();
  const Big h = exp(-bz * bz / 2) / sqrt(2 * pi) + bz * erfc(-bz / sqrt(Big(2))) / 2;
  return static_cast<double>(log(h));
}

inline double matern52_oracle(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, const bo::GpHyper& h) {
  const double r = ((a - b).array() / h.lengthscales.transpose().array()).matrix().norm();
  const double s = std::sqrt(5.0) * r;
  return h.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

/// Posterior by dense LU on the standardized targets with a GLS constant mean.
inline std::pair<double, double> dense_posterior(const bo::GpModel& m, const Eigen::RowVectorXd& q) {
  const auto& x = m.train_x();
  const auto n = x.rows();
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = matern52_oracle(x.row(i), x.row(j), m.hyper());
    k(i, i) += m.noise();
    ks(i) = matern52_oracle(x.row(i), q, m.hyper());
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd y = m.train_y();
  const double mean = ones.dot(lu.solve(y)) / ones.dot(lu.solve(ones));
  const Eigen::VectorXd resid = y.array() - mean;
  const double mu = mean + ks.dot(lu.solve(resid));
  const double var = m.hyper().signal_variance - ks.dot(lu.solve(ks));
  return {mu, std::sqrt(std::max(0.0, var))};
}

/// Conditioned model with random data and hyperparameters, 1-5 dims, 5-30 points.
inline bo::GpModel random_gp_model(Rng& rng) {
  const int d = rng.uniform_int(1, 5);
  const int n = rng.uniform_int(5, 30);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-1, 1);
    y(i) = rng.normal() * 3.0 + 1.0;
  }
  bo::GpHyper h;
  h.lengthscales = Eigen::VectorXd(d);
  for (int j = 0; j < d; ++j) h.lengthscales(j) = rng.log_uniform(0.2, 2.0);
  h.signal_variance = rng.log_uniform(0.5, 2.0);
  h.noise = rng.log_uniform(1e-4, 1e-2);
  return bo::GpModel::condition(x, y, h);
}

/// Global error at t=1 of y'' = -y, y(0)=1, y'(0)=0 with n RK4 steps.
inline double oscillator_error(int steps) {
  auto rhs = [](double, const Eigen::Vector2d& y) { return Eigen::Vector2d(y(1), -y(0)); };
  const Eigen::Vector2d y = functions::rk4_integrate(rhs, Eigen::Vector2d(1.0, 0.0), 0.0, 1.0, steps);
  return (y - Eigen::Vector2d(std::cos(1.0), -std::sin(1.0))).norm();
}

/// Scalar y' = y cos t, y(0) = 1, exact y = exp(sin t), at t = 2.
inline double scalar_ode_error(int steps) {
  auto rhs = [](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd { return y * std::cos(t); };
  const Eigen::VectorXd y = functions::rk4_integrate(rhs, Eigen::VectorXd(Eigen::VectorXd::Ones(1)), 0.0, 2.0, steps);
  return std::abs(y(0) - std::exp(std::sin(2.0)));
}

/// n trajectories of one 2-D function with 10 init points, between max_steps/2
/// and max_steps optimization steps, and heavily tied integer values.
inline std::vector<Trajectory> random_trajectory_group(Rng& rng, int n, int max_steps) {
  std::vector<Trajectory> ts;
  for (int i = 0; i < n; ++i) {
    Trajectory t;
    t.function_id = "f";
    t.dim = 2;
    t.optimizer_id = "opt-" + std::to_string(rng.uniform_int(0, 2));
    t.seed = static_cast<std::uint64_t>(rng.uniform_int(0, 3));
    const int steps = rng.uniform_int(max_steps / 2, max_steps);
    for (int j = 0; j < 10 + steps; ++j) t.append(rng.unit_point(2), static_cast<double>(rng.uniform_int(0, 6)));
    ts.push_back(std::move(t));
  }
  return ts;
}

/// Top-k at step count c by counting, for each eligible trajectory, how many
/// eligible trajectories sort strictly ahead of it. Assumes n_init = 10.
inline std::set<std::size_t> brute_force_top_k(const std::vector<Trajectory>& ts, int k, int c) {
  auto key = [&](std::size_t i) {
    return std::make_tuple(ts[i].best_within(static_cast<std::size_t>(10 + c)), ts[i].optimizer_id, ts[i].seed, i);
  };
  std::set<std::size_t> chosen;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].steps_completed() < c) continue;
    int ahead = 0;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (j != i && ts[j].steps_completed() >= c && key(j) < key(i)) ++ahead;
    if (ahead < k) chosen.insert(i);
  }
  return chosen;
}

/// EI over every code in long double; lowest index wins ties.
inline std::size_t exhaustive_select(const std::vector<policy::PolicyProposal>& ps, int incumbent) {
  std::size_t best = 0;
  long double best_ei = -1.0L;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    long double ei = 0.0L;
    for (int s = 0; s < policy::kNumCodes; ++s)
      ei += static_cast<long double>(ps[i].objective_dist[static_cast<std::size_t>(s)]) * std::max(0, incumbent - s);
    if (ei > best_ei) {
      best_ei = ei;
      best = i;
    }
  }
  return best;
}

/// Normalized distribution on 1-20 random codes.
inline policy::ObjectiveDist random_code_dist(Rng& rng) {
  policy::ObjectiveDist d(policy::kNumCodes, 0.0);
  const int support = rng.uniform_int(1, 20);
  for (int i = 0; i < support; ++i) d[static_cast<std::size_t>(rng.uniform_int(0, 999))] += rng.uniform(0.01, 1.0);
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  for (double& p : d) p /= sum;
  return d;
}

/// Prompt with random dimension, declared length, response length and codes.
inline dataset::TokenizedPrompt random_tokenized_prompt(Rng& rng) {
  dataset::TokenizedPrompt p;
  p.dim = rng.uniform_int(1, 10);
  p.n_random = dataset::kRandomSteps;
  p.n_opt = rng.uniform_int(0, 60);
  const int n_resp = rng.uniform_int(0, p.n_opt);
  auto step = [&] {
    dataset::TokenizedStep s;
    for (int j = 0; j < p.dim; ++j) s.action_codes.push_back(rng.uniform_int(0, dataset::kMaxCode));
    s.objective_code = rng.uniform_int(0, dataset::kMaxCode);
    s.is_new_best = rng.bernoulli(0.3);
    return s;
  };
  for (int i = 0; i < p.n_random; ++i) p.random_steps.push_back(step());
  for (int i = 0; i < n_resp; ++i) p.response_steps.push_back(step());
  return p;
}

/// Empty when aug(x) respects the bound of its single augmentation relative
/// to base(x); otherwise a description of the violation. Range-relative bounds
/// use the base range recorded on the augmentation.
inline std::string augmentation_bound_violation(const functions::SyntheticFunction& base,
                                                const functions::SyntheticFunction& aug, const Point& x) {
  using namespace functions;
  constexpr double tol = 1e-12;
  const auto& s = aug.augmentations().at(0);
  const double f = base(x);
  const double g = aug(x);
  const double gap = std::abs(g - f);
  const double dim = static_cast<double>(x.size());
  const double range = s.scale;
  if (!std::isfinite(g)) return "non-finite value";
  switch (s.kind) {
    case AugKind::input_warp: {
      std::vector<double> w(x.size());
      apply_input_warp(std::get<InputWarp>(s.params), x, w);
      for (double c : w)
        if (std::abs(c) > 1.0 + tol) return "warped coordinate left the box";
      if (g != base.evaluate_base(w)) return "warp is not a pure input transform";
      return {};
    }
    case AugKind::staircase: {
      double total = 0.0;
      for (double h : std::get<Staircase>(s.params).heights) total += std::abs(h);
      if (gap > total + tol) return "staircase offset exceeds the summed step heights";
      if (total > 0.8 * range + tol) return "staircase heights exceed 0.8 of the range";
      return {};
    }
    case AugKind::ripple:
      return gap <= 0.1 * range + tol ? std::string{} : "ripple exceeds 0.1 of the range";
    case AugKind::plateau: {
      const auto& c = std::get<Plateau>(s.params).centroids;
      const double cmin = std::min(f, *std::min_element(c.begin(), c.end()));
      const double cmax = std::max(f, *std::max_element(c.begin(), c.end()));
      return g >= cmin - tol && g <= cmax + tol ? std::string{} : "plateau value outside the centroid hull";
    }
    case AugKind::kink: {
      const auto& k = std::get<Kink>(s.params);
      double bound = std::abs(k.bend_amplitude) * std::pow(std::sqrt(dim), k.bend_power);
      for (std::size_t q = 0; q < k.directions.size(); ++q)
        bound += std::abs(k.amplitudes[q]) * (std::sqrt(dim) + std::abs(k.offsets[q]) + std::log(2.0) / k.sharpness[q]);
      return gap <= bound + tol ? std::string{} : "kink offset exceeds its bound";
    }
  }
  return "unknown augmentation kind";
}

}  // namespace gptopt::fixtures
