#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/functions/augment.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/expr_tree.hpp"
#include "gptopt/functions/fourier.hpp"
#include "gptopt/functions/gp_prior.hpp"
#include "gptopt/functions/neural_net.hpp"
#include "gptopt/functions/ode.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

/// A seeded objective on [-1,1]^d: a family body plus an ordered
/// augmentation stack. Immutable; copies share the body.
class SyntheticFunction {
 public:
  SyntheticFunction(FunctionSpec spec, std::shared_ptr<const FunctionBody> body,
                    std::vector<AugmentationSpec> augmentations = {})
      : spec_(std::move(spec)), body_(std::move(body)), augs_(std::move(augmentations)) {
    if (body_->dim() != spec_.dim) throw ConfigError("function body dimension does not match spec");
  }

  const FunctionSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  std::string id() const { return spec_.id(); }
  const FunctionBody& body() const { return *body_; }
  std::shared_ptr<const FunctionBody> body_ptr() const { return body_; }
  const std::vector<AugmentationSpec>& augmentations() const { return augs_; }

  double operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != spec_.dim) throw DomainError("point has wrong dimension");
    double f;
    const AugmentationSpec* warp = nullptr;
    for (const auto& a : augs_)
      if (a.kind == AugKind::input_warp) warp = &a;
    if (warp) {
      std::vector<double> xw(x.size());
      apply_input_warp(std::get<InputWarp>(warp->params), x, xw);
      f = body_->evaluate(xw);
    } else {
      f = body_->evaluate(x);
    }
    for (const auto& a : augs_) f = apply_output_augmentation(a, x, f);
    return f;
  }

  double evaluate_base(std::span<const double> x) const { return body_->evaluate(x); }

  std::string describe() const {
    std::string s = body_->describe();
    for (const auto& a : augs_) s += " +" + std::string(to_string(a.kind));
    return s;
  }

  Objective as_objective() const {
    auto self = std::make_shared<const SyntheticFunction>(*this);
    return Objective{id(), dim(), [self](std::span<const double> x) { return (*self)(x); }, std::nullopt};
  }

 private:
  FunctionSpec spec_;
  std::shared_ptr<const FunctionBody> body_;
  std::vector<AugmentationSpec> augs_;
};

/// Probe the base body at `n` seeded random points; returns {min, max}.
inline std::pair<double, double> probe_range(const FunctionBody& body, int n, Rng& rng) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < n; ++i) {
    const auto x = rng.unit_point(body.dim());
    const double f = body.evaluate(x);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo, hi};
}

/// Rebuild `fn` on its base body with a freshly drawn augmentation stack.
/// Each kind is included independently with its configured probability;
/// amplitudes scale with the base range probed at cfg.range_probes points.
/// A (near-)constant base keeps only the input warp.
inline SyntheticFunction apply_augmentations(const SyntheticFunction& fn, std::uint64_t augment_seed,
                                             const AugmentationConfig& cfg = {}) {
  Rng range_rng(derive_seed(augment_seed, "range"));
  const auto [lo, hi] = probe_range(fn.body(), cfg.range_probes, range_rng);
  const double range = hi - lo;
  const bool degenerate = !(range >= cfg.degenerate_range);

  std::vector<AugmentationSpec> augs;
  for (std::size_t k = 0; k < kAllAugKinds.size(); ++k) {
    const AugKind kind = kAllAugKinds[k];
    Rng rng(derive_seed(augment_seed, {fnv1a64("augment"), static_cast<std::uint64_t>(k)}));
    if (!rng.bernoulli(cfg.probability[k])) continue;
    if (degenerate && kind != AugKind::input_warp) continue;
    augs.push_back(sample_augmentation(kind, fn.dim(), lo, range, rng));
  }
  FunctionSpec spec = fn.spec();
  spec.augment_seed = augment_seed;
  return SyntheticFunction(std::move(spec), fn.body_ptr(), std::move(augs));
}

inline std::shared_ptr<const FunctionBody> make_body(const FunctionSpec& spec) {
  switch (spec.family) {
    case Family::gp: return gp_prior_function(spec.dim, spec.seed, spec.family_params);
    case Family::nn: return nn_function(spec.dim, spec.seed, spec.family_params);
    case Family::ode: return ode_function(spec.dim, spec.seed, spec.family_params);
    case Family::expr_tree: return expr_tree_function(spec.dim, spec.seed, spec.family_params);
    case Family::fourier: return fourier_function(spec.dim, spec.seed, spec.family_params);
  }
  throw ConfigError("unsupported function family");
}

inline SyntheticFunction make_function(const FunctionSpec& spec) {
  spec.validate();
  FunctionSpec base_spec = spec;
  base_spec.augment_seed.reset();
  SyntheticFunction base(base_spec, make_body(spec));
  if (spec.augment_seed) return apply_augmentations(base, *spec.augment_seed);
  return base;
}

/// One FunctionSpec per line. Extra keys (e.g. "function_id") are ignored.
inline std::vector<FunctionSpec> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path);
  std::vector<FunctionSpec> specs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto spec = json::parse(line).get<FunctionSpec>();
      spec.validate();
      specs.push_back(std::move(spec));
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return specs;
}

inline std::string manifest_line(const FunctionSpec& spec) {
  json j = spec;
  j["function_id"] = spec.id();
  return j.dump();
}

}  // namespace gptopt::functions
