#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "gptopt/core/random.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

struct FourierTerm {
  double amplitude = 0.0;
  std::vector<double> omega;
  double phase = 0.0;
};

struct FourierParams {
  std::vector<FourierTerm> terms;

  static constexpr int kMinTerms = 5;
  static constexpr int kMaxTerms = 50;
  static constexpr double kMaxAbsAmplitude = 1.0;
  static constexpr double kMaxAbsFrequency = 5.0;

  static FourierParams sample(int dim, Rng& rng, int n_terms = 0) {
    if (n_terms <= 0) n_terms = rng.uniform_int(kMinTerms, kMaxTerms);
    FourierParams p;
    p.terms.resize(static_cast<std::size_t>(n_terms));
    for (auto& t : p.terms) {
      t.amplitude = rng.uniform(-kMaxAbsAmplitude, kMaxAbsAmplitude);
      t.omega.resize(static_cast<std::size_t>(dim));
      for (auto& w : t.omega) w = rng.uniform(-kMaxAbsFrequency, kMaxAbsFrequency);
      t.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return p;
  }
};

/// f(x) = sum_i A_i sin(omega_i . x + phi_i)
class FourierFunction final : public FunctionBody {
 public:
  FourierFunction(int dim, FourierParams params) : dim_(dim), params_(std::move(params)) {
    for (const auto& t : params_.terms)
      if (static_cast<int>(t.omega.size()) != dim_) throw ConfigError("fourier term frequency has wrong dimension");
  }

  int dim() const override { return dim_; }

  double evaluate(std::span<const double> x) const override {
    double f = 0.0;
    for (const auto& t : params_.terms) {
      double arg = t.phase;
      for (int i = 0; i < dim_; ++i) arg += t.omega[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      f += t.amplitude * std::sin(arg);
    }
    return f;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "fourier(" << params_.terms.size() << " terms)";
    return os.str();
  }

  const FourierParams& params() const { return params_; }

  double amplitude_sum() const {
    double s = 0.0;
    for (const auto& t : params_.terms) s += std::abs(t.amplitude);
    return s;
  }

 private:
  int dim_;
  FourierParams params_;
};

/// family_params: {"n_terms": int} or {"terms": [{"amplitude", "omega": [...], "phase"}]}.
inline std::shared_ptr<const FourierFunction> fourier_function(int dim, std::uint64_t seed,
                                                                const json& overrides = json::object()) {
  check_param_keys(overrides, {"n_terms", "terms"}, Family::fourier);
  if (overrides.contains("terms")) {
    FourierParams p;
    for (const auto& t : overrides.at("terms"))
      p.terms.push_back({t.at("amplitude").get<double>(), t.at("omega").get<std::vector<double>>(),
                         t.at("phase").get<double>()});
    if (p.terms.empty()) throw ConfigError("fourier 'terms' must be non-empty");
    return std::make_shared<FourierFunction>(dim, std::move(p));
  }
  Rng rng(derive_seed(seed, "fourier"));
  const int n = overrides.value("n_terms", 0);
  if (overrides.contains("n_terms") && n < 1) throw ConfigError("fourier n_terms must be >= 1");
  return std::make_shared<FourierFunction>(dim, FourierParams::sample(dim, rng, n));
}

}  // namespace gptopt::functions
