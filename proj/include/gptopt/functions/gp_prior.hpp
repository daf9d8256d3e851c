#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/kernels.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

inline constexpr int kAnchorsPerDim = 64;

/// A joint draw of the prior at the anchors plus the weights of the
/// conditioned mean.
struct PriorDraw {
  Eigen::VectorXd values;   // sampled anchor values
  Eigen::VectorXd weights;  // (K + nugget I)^-1 values
  double nugget = 0.0;      // diagonal jitter that made K factorizable
};

inline Eigen::MatrixXd gram_matrix(const CompositeKernel& k, const std::vector<Point>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = k(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < i; ++j) g(i, j) = g(j, i) = k(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
  }
  return g;
}

/// Sample values ~ N(0, K + nugget I) at the anchors. The nugget starts at
/// 1e-10 * k(x,x) and escalates x10 up to 1e-4 * k(x,x).
inline PriorDraw draw_prior_values(const CompositeKernel& kernel, const std::vector<Point>& anchors, Rng& rng) {
  const Eigen::MatrixXd k = gram_matrix(kernel, anchors);
  const auto n = k.rows();
  const double diag = kernel.diagonal();
  for (double rel = 1e-10; rel <= 1.0001e-4; rel *= 10.0) {
    const double nugget = rel * diag;
    Eigen::LLT<Eigen::MatrixXd> llt(k + nugget * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd eps(n);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = rng.normal();
    PriorDraw d;
    d.values = llt.matrixL() * eps;
    d.weights = llt.solve(d.values);
    d.nugget = nugget;
    return d;
  }
  throw GenerationError("GP prior covariance not positive definite after jitter escalation");
}

/// Posterior mean of a GP prior sample conditioned on its anchor values.
///
/// The conditioning kernel is k + nugget * [x == x'], so the surface
/// reproduces the anchor values exactly at the anchors and equals the smooth
/// conditioned mean everywhere else.
class GpPriorFunction final : public FunctionBody {
 public:
  GpPriorFunction(int dim, CompositeKernel kernel, std::vector<Point> anchors, PriorDraw draw)
      : dim_(dim), kernel_(std::move(kernel)), anchors_(std::move(anchors)), draw_(std::move(draw)) {}

  int dim() const override { return dim_; }

  double evaluate(std::span<const double> x) const override {
    double f = 0.0;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
      const auto& a = anchors_[i];
      const auto w = draw_.weights(static_cast<Eigen::Index>(i));
      f += kernel_(x, a) * w;
      if (std::equal(a.begin(), a.end(), x.begin())) f += draw_.nugget * w;
    }
    return f;
  }

  std::string describe() const override {
    return "gp(" + kernel_.describe() + ", anchors=" + std::to_string(anchors_.size()) + ")";
  }

  const CompositeKernel& kernel() const { return kernel_; }
  const std::vector<Point>& anchors() const { return anchors_; }
  const PriorDraw& draw() const { return draw_; }

 private:
  int dim_;
  CompositeKernel kernel_;
  std::vector<Point> anchors_;
  PriorDraw draw_;
};

inline CompositeKernel kernel_from_json(const json& overrides, Rng& rng) {
  if (!overrides.contains("kernels")) return CompositeKernel::sample(rng, overrides.value("n_kernels", 0));
  CompositeKernel c;
  for (const auto& kj : overrides.at("kernels")) {
    BaseKernel k = CompositeKernel::sample_part(rng);
    if (kj.contains("kind")) k.kind = kernel_kind_from_string(kj.at("kind").get<std::string>());
    k.lengthscale = kj.value("lengthscale", k.lengthscale);
    k.variance = kj.value("variance", k.variance);
    k.nu = kj.value("nu", k.nu);
    k.alpha = kj.value("alpha", k.alpha);
    if (k.lengthscale <= 0 || k.variance <= 0) throw ConfigError("kernel lengthscale and variance must be > 0");
    c.parts.push_back(k);
  }
  if (c.parts.empty() || c.parts.size() > 3) throw ConfigError("gp 'kernels' must list 1..3 kernels");
  const auto combs = overrides.value("combiners", std::vector<std::string>{});
  for (std::size_t i = 1; i < c.parts.size(); ++i) {
    if (i - 1 < combs.size()) {
      if (combs[i - 1] != "add" && combs[i - 1] != "mul") throw ConfigError("combiner must be 'add' or 'mul'");
      c.combiners.push_back(combs[i - 1] == "add" ? Combiner::add : Combiner::mul);
    } else {
      c.combiners.push_back(rng.bernoulli(0.5) ? Combiner::add : Combiner::mul);
    }
  }
  return c;
}

/// family_params: {"n_kernels": 1..3, "kernels": [{"kind","lengthscale","variance","nu","alpha"}],
///                 "combiners": ["add"|"mul"], "n_anchors": int}.
inline std::shared_ptr<const GpPriorFunction> gp_prior_function(int dim, std::uint64_t seed,
                                                                  const json& overrides = json::object()) {
  check_param_keys(overrides, {"n_kernels", "kernels", "combiners", "n_anchors"}, Family::gp);
  const int n_kernels = overrides.value("n_kernels", 0);
  if (overrides.contains("n_kernels") && (n_kernels < 1 || n_kernels > 3))
    throw ConfigError("gp n_kernels must be in [1,3]");
  const int n_anchors = overrides.value("n_anchors", kAnchorsPerDim * dim);
  if (n_anchors < 1) throw ConfigError("gp n_anchors must be >= 1");

  constexpr int kMaxAttempts = 5;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t sub = derive_seed(seed, {fnv1a64("gp"), static_cast<std::uint64_t>(attempt)});
    Rng kernel_rng(derive_seed(sub, "kernel"));
    Rng anchor_rng(derive_seed(sub, "anchors"));
    Rng value_rng(derive_seed(sub, "values"));
    CompositeKernel kernel = kernel_from_json(overrides, kernel_rng);
    auto anchors = latin_hypercube(n_anchors, dim, anchor_rng);
    try {
      auto draw = draw_prior_values(kernel, anchors, value_rng);
      return std::make_shared<GpPriorFunction>(dim, std::move(kernel), std::move(anchors), std::move(draw));
    } catch (const GenerationError&) {
      continue;
    }
  }
  throw GenerationError("GP prior generation failed after retries");
}

}  // namespace gptopt::functions
