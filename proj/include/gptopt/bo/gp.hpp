#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/random.hpp"

namespace gptopt::bo {

/// Matern-5/2 kernel hyperparameters with one lengthscale per input dimension.
struct GpHyper {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise = 1e-6;
};

/// Box for the log-space hyperparameter search (standardized outputs, inputs in [-1,1]).
struct GpBounds {
  double min_lengthscale = 0.02, max_lengthscale = 20.0;
  double min_signal = 0.05, max_signal = 20.0;
  double min_noise = 1e-6, max_noise = 0.1;
};

struct GpFitOptions {
  int restarts = 8;
  int max_iterations = 60;
  std::uint64_t seed = 0;
  GpBounds bounds;
};

inline constexpr double kJitterFloor = 1e-6;
inline constexpr double kJitterCeiling = 1e-2;

namespace detail {

inline constexpr double kSqrt5 = 2.2360679774997896964;

/// Scaled squared distance sum_i ((x_i - y_i) / l_i)^2.
inline double scaled_sqdist(const double* x, const double* y, const Eigen::VectorXd& ls) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < ls.size(); ++i) {
    const double d = (x[i] - y[i]) / ls(i);
    r2 += d * d;
  }
  return r2;
}

inline double matern52(double r2, double s2) {
  const double a = kSqrt5 * std::sqrt(r2);
  return s2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

/// Unpack log-space parameter vector [log l_1..log l_d, log s2, log noise].
inline GpHyper unpack(const Eigen::VectorXd& theta, int dim) {
  GpHyper h;
  h.lengthscales = theta.head(dim).array().exp();
  h.signal_variance = std::exp(theta(dim));
  h.noise = std::exp(theta(dim + 1));
  return h;
}

inline Eigen::VectorXd pack(const GpHyper& h) {
  const auto d = h.lengthscales.size();
  Eigen::VectorXd theta(d + 2);
  theta.head(d) = h.lengthscales.array().log();
  theta(d) = std::log(h.signal_variance);
  theta(d + 1) = std::log(h.noise);
  return theta;
}

}  // namespace detail

/// Noise-free Matern-5/2 Gram matrix between rows of a (n x d) and b (m x d).
inline Eigen::MatrixXd matern52_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GpHyper& h) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = detail::matern52(detail::scaled_sqdist(at.col(i).data(), bt.col(j).data(), h.lengthscales),
                                 h.signal_variance);
  return k;
}

struct MllResult {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;  // w.r.t. log-space parameters
  double mean_const = 0.0;   // profiled constant mean
  bool ok = false;
};

/// Log marginal likelihood of standardized targets `y` under `h`, with the
/// constant mean profiled out in closed form (GLS estimate). Returns ok=false
/// when K + noise*I cannot be factorized.
inline MllResult log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyper& h,
                                         bool with_gradient = true) {
  const auto n = x.rows();
  const auto d = x.cols();
  MllResult out;
  Eigen::MatrixXd k = matern52_cross(x, x, h);
  Eigen::MatrixXd kn = k;
  kn.diagonal().array() += h.noise;
  Eigen::LLT<Eigen::MatrixXd> llt(kn);
  if (llt.info() != Eigen::Success) return out;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd kinv_1 = llt.solve(ones);
  const Eigen::VectorXd kinv_y = llt.solve(y);
  out.mean_const = ones.dot(kinv_y) / ones.dot(kinv_1);
  const Eigen::VectorXd alpha = kinv_y - out.mean_const * kinv_1;
  const Eigen::VectorXd resid = y.array() - out.mean_const;
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.value = -0.5 * resid.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(out.value)) return out;
  out.ok = true;
  if (!with_gradient) return out;

  // d/dtheta = 0.5 * tr((alpha alpha^T - K^-1) dK/dtheta). dK/dlog(l) vanishes on
  // the diagonal, so the lengthscale terms are a sum over pairs i < j.
  const Eigen::MatrixXd w = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
  out.gradient = Eigen::VectorXd::Zero(d + 2);
  const Eigen::MatrixXd xt = x.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double r2 = detail::scaled_sqdist(xt.col(i).data(), xt.col(j).data(), h.lengthscales);
      const double a = detail::kSqrt5 * std::sqrt(r2);
      // dk/dlog(l_p) = s2 * 5/3 * (1 + a) * exp(-a) * (d_p / l_p)^2
      const double common = h.signal_variance * (5.0 / 3.0) * (1.0 + a) * std::exp(-a) * w(i, j);
      for (Eigen::Index p = 0; p < d; ++p) {
        const double dp = (x(i, p) - x(j, p)) / h.lengthscales(p);
        out.gradient(p) += common * dp * dp;
      }
    }
  }
  out.gradient(d) = 0.5 * (w.array() * k.array()).sum();
  out.gradient(d + 1) = 0.5 * h.noise * w.trace();
  return out;
}

struct GpFitTrace {
  std::vector<double> start_mll;  // per restart, at the starting point
  std::vector<double> final_mll;  // per restart, best reached
  int best_restart = -1;
};

/// Fitted GP surrogate. Immutable; posterior queries are const and thread-safe.
class GpModel {
 public:
  GpModel() = default;

  /// Factorize K + noise*I for the given hyperparameters, escalating jitter
  /// x10 from 1e-6 up to 1e-2 on failure.
  static GpModel condition(Eigen::MatrixXd x, Eigen::VectorXd y_raw, GpHyper hyper) {
    GpModel m;
    m.x_ = std::move(x);
    m.y_mean_ = y_raw.mean();
    const double var = y_raw.size() > 1 ? (y_raw.array() - m.y_mean_).square().sum() / (y_raw.size() - 1) : 0.0;
    m.y_std_ = var > 0.0 && std::isfinite(var) ? std::sqrt(var) : 1.0;
    m.y_ = (y_raw.array() - m.y_mean_) / m.y_std_;
    m.hyper_ = std::move(hyper);
    m.factorize();
    return m;
  }

  const Eigen::MatrixXd& train_x() const { return x_; }
  const Eigen::VectorXd& train_y() const { return y_; }
  const GpHyper& hyper() const { return hyper_; }
  double mean_const() const { return mean_const_; }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }
  double noise() const { return hyper_.noise + extra_jitter_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  int dim() const { return static_cast<int>(x_.cols()); }
  double log_marginal_likelihood() const { return mll_; }
  const GpFitTrace& trace() const { return trace_; }

  double to_standardized(double y) const { return (y - y_mean_) / y_std_; }

  /// Posterior mean and standard deviation of the latent function in standardized units.
  std::pair<double, double> posterior_standardized(std::span<const double> x) const {
    const auto n = x_.rows();
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (Eigen::Index p = 0; p < x_.cols(); ++p) {
        const double dd = (x_(i, p) - x[static_cast<std::size_t>(p)]) / hyper_.lengthscales(p);
        r2 += dd * dd;
      }
      ks(i) = detail::matern52(r2, hyper_.signal_variance);
    }
    const double mu = mean_const_ + ks.dot(alpha_);
    chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
    const double var = std::max(0.0, hyper_.signal_variance - ks.squaredNorm());
    return {mu, std::sqrt(var)};
  }

  /// Batched standardized posterior for the rows of xs.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_standardized(const Eigen::MatrixXd& xs) const {
    Eigen::MatrixXd ks = matern52_cross(x_, xs, hyper_);  // n x m
    Eigen::VectorXd mu = (ks.transpose() * alpha_).array() + mean_const_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
    Eigen::VectorXd var = (hyper_.signal_variance - ks.colwise().squaredNorm().transpose().array()).max(0.0);
    return {std::move(mu), var.array().sqrt()};
  }

  /// Posterior mean and standard deviation in the original output units.
  std::pair<double, double> posterior(std::span<const double> x) const {
    const auto [mu, sd] = posterior_standardized(x);
    return {y_mean_ + y_std_ * mu, y_std_ * sd};
  }

 private:
  friend GpModel fit_gp(std::span<const Point>, std::span<const double>, const GpFitOptions&);

  void factorize() {
    const auto n = x_.rows();
    Eigen::MatrixXd k = matern52_cross(x_, x_, hyper_);
    for (double jitter = 0.0; jitter <= kJitterCeiling * 1.0001; jitter = jitter == 0.0 ? kJitterFloor : jitter * 10.0) {
      Eigen::MatrixXd kn = k;
      kn.diagonal().array() += hyper_.noise + jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(kn);
      if (llt.info() != Eigen::Success) continue;
      extra_jitter_ = jitter;
      chol_ = llt.matrixL();
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
      const Eigen::VectorXd kinv_1 = llt.solve(ones);
      const Eigen::VectorXd kinv_y = llt.solve(y_);
      mean_const_ = ones.dot(kinv_y) / ones.dot(kinv_1);
      alpha_ = kinv_y - mean_const_ * kinv_1;
      const Eigen::VectorXd resid = y_.array() - mean_const_;
      mll_ = -0.5 * resid.dot(alpha_) - chol_.diagonal().array().log().sum() -
             0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      return;
    }
    throw SurrogateError("Cholesky failed after jitter escalation to 1e-2");
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0, y_std_ = 1.0;
  GpHyper hyper_;
  double mean_const_ = 0.0;
  double extra_jitter_ = 0.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double mll_ = 0.0;
  GpFitTrace trace_;
};

inline Eigen::MatrixXd to_matrix(std::span<const Point> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto d = n > 0 ? static_cast<Eigen::Index>(points[0].size()) : 0;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return x;
}

/// Maximize the log marginal likelihood with seeded multistart Rprop in
/// log-parameter space. Restart 0 starts from a fixed default; the others
/// from uniform draws in the box. The best restart wins.
inline GpModel fit_gp(std::span<const Point> points, std::span<const double> values, const GpFitOptions& opt = {}) {
  if (points.size() < 2 || points.size() != values.size())
    throw SurrogateError("fit_gp needs at least 2 points with matching values");
  for (double v : values)
    if (!std::isfinite(v)) throw SurrogateError("fit_gp received a non-finite value");
  const Eigen::MatrixXd x = to_matrix(points);
  if (!x.allFinite()) throw SurrogateError("fit_gp received a non-finite coordinate");
  const int d = static_cast<int>(x.cols());
  const Eigen::VectorXd y_raw = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const double y_mean = y_raw.mean();
  const double var = (y_raw.array() - y_mean).square().sum() / static_cast<double>(y_raw.size() - 1);
  const double y_std = var > 0.0 && std::isfinite(var) ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd y = (y_raw.array() - y_mean) / y_std;

  const auto& b = opt.bounds;
  Eigen::VectorXd lo(d + 2), hi(d + 2);
  lo.head(d).setConstant(std::log(b.min_lengthscale));
  hi.head(d).setConstant(std::log(b.max_lengthscale));
  lo(d) = std::log(b.min_signal);
  hi(d) = std::log(b.max_signal);
  lo(d + 1) = std::log(b.min_noise);
  hi(d + 1) = std::log(b.max_noise);

  Rng rng(derive_seed(opt.seed, "gp-fit"));
  GpFitTrace trace;
  Eigen::VectorXd best_theta;
  double best_value = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Eigen::VectorXd theta(d + 2);
    if (r == 0) {
      theta.head(d).setConstant(std::log(0.5));
      theta(d) = 0.0;
      theta(d + 1) = std::log(1e-4);
    } else {
      for (int p = 0; p < d; ++p) theta(p) = rng.uniform(std::log(0.05), std::log(2.0));
      theta(d) = rng.uniform(std::log(0.2), std::log(5.0));
      theta(d + 1) = rng.uniform(std::log(1e-6), std::log(1e-2));
    }
    auto cur = log_marginal_likelihood(x, y, detail::unpack(theta, d));
    trace.start_mll.push_back(cur.value);
    Eigen::VectorXd run_best = theta;
    double run_best_value = cur.value;

    // iRprop-: sign-based steps with per-parameter adaptive sizes.
    Eigen::VectorXd step = Eigen::VectorXd::Constant(d + 2, 0.2);
    Eigen::VectorXd prev_grad = Eigen::VectorXd::Zero(d + 2);
    for (int it = 0; it < opt.max_iterations && cur.ok; ++it) {
      Eigen::VectorXd g = cur.gradient;
      for (int p = 0; p < d + 2; ++p) {
        const double s = g(p) * prev_grad(p);
        if (s > 0) {
          step(p) = std::min(step(p) * 1.2, 1.0);
        } else if (s < 0) {
          step(p) = std::max(step(p) * 0.5, 1e-6);
          g(p) = 0.0;
        }
        if (g(p) > 0)
          theta(p) += step(p);
        else if (g(p) < 0)
          theta(p) -= step(p);
        theta(p) = std::clamp(theta(p), lo(p), hi(p));
      }
      prev_grad = g;
      auto next = log_marginal_likelihood(x, y, detail::unpack(theta, d));
      if (!next.ok) {
        theta = run_best;
        step *= 0.5;
        prev_grad.setZero();
        cur = log_marginal_likelihood(x, y, detail::unpack(theta, d));
        continue;
      }
      cur = std::move(next);
      if (cur.value > run_best_value) {
        run_best_value = cur.value;
        run_best = theta;
      }
      if (step.maxCoeff() < 1e-3) break;
    }
    trace.final_mll.push_back(run_best_value);
    if (run_best_value > best_value || best_theta.size() == 0) {
      best_value = run_best_value;
      best_theta = run_best;
      trace.best_restart = r;
    }
  }

  GpModel model = GpModel::condition(x, y_raw, detail::unpack(best_theta, d));
  model.trace_ = std::move(trace);
  return model;
}

}  // namespace gptopt::bo
