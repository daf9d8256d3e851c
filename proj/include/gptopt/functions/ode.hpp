#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/random.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/rk4.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

/// One sinusoid of the forcing term: direction * (amp0 + amp_lin . z) * sin(omega t + phase).
struct ForcingTerm {
  Eigen::VectorXd direction;
  double amp0 = 0.0;
  Eigen::VectorXd amp_lin;
  double omega = 0.0;
  double phase = 0.0;
};

/// dy/dt = A(z) y + tanh(B(z) y) + U(z) + f_forc(t, z), with A, B, U affine in z.
/// Empty *_lin vectors mean the coefficient does not depend on z.
struct OdeParams {
  Eigen::MatrixXd a0, b0;
  std::vector<Eigen::MatrixXd> a_lin, b_lin;
  Eigen::VectorXd u0;
  std::vector<Eigen::VectorXd> u_lin;
  std::vector<ForcingTerm> forcing;
  Eigen::VectorXd y0, readout;
  int steps = 100;
  double horizon = 1.0;
  bool spectral_clamp = true;

  static constexpr int kMinStateDim = 2;
  static constexpr int kMaxStateDim = 6;
  static constexpr int kMinSteps = 100;
  static constexpr int kMaxSteps = 200;
  static constexpr double kStateLimit = 1e6;
  static constexpr double kSpectralBound = 3.0;  // times 1/horizon

  int state_dim() const { return static_cast<int>(y0.size()); }

  static OdeParams sample(int dim, Rng& rng, int state_dim = 0, int steps = 0) {
    const int m = state_dim > 0 ? state_dim : rng.uniform_int(kMinStateDim, kMaxStateDim);
    OdeParams p;
    p.steps = steps > 0 ? steps : rng.uniform_int(kMinSteps, kMaxSteps);
    auto matrix = [&](double sd) {
      Eigen::MatrixXd a(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = rng.normal(0.0, sd);
      return a;
    };
    auto vector = [&](int n, double sd) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = rng.normal(0.0, sd);
      return v;
    };
    const double sd = 1.0 / std::sqrt(static_cast<double>(m));
    p.a0 = matrix(sd);
    p.b0 = matrix(2.0 * sd);
    for (int j = 0; j < dim; ++j) p.a_lin.push_back(matrix(sd));
    for (int j = 0; j < dim; ++j) p.b_lin.push_back(matrix(sd));
    p.u0 = vector(m, 0.5);
    for (int j = 0; j < dim; ++j) p.u_lin.push_back(vector(m, 0.5));
    const int n_forcing = rng.uniform_int(0, 3);
    for (int q = 0; q < n_forcing; ++q) {
      ForcingTerm f;
      f.direction = vector(m, 1.0).normalized();
      f.amp0 = rng.normal(0.0, 0.5);
      f.amp_lin = vector(dim, 0.5);
      f.omega = rng.uniform(1.0, 20.0);
      f.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      p.forcing.push_back(std::move(f));
    }
    p.y0 = vector(m, 1.0);
    p.readout = vector(m, sd);
    return p;
  }
};

struct OdeEvaluation {
  double value;
  Eigen::VectorXd final_state;
  bool clamped;  // state hit the magnitude guard at least once
};

class OdeFunction final : public FunctionBody {
 public:
  OdeFunction(int dim, OdeParams params) : dim_(dim), p_(std::move(params)) {}

  int dim() const override { return dim_; }

  double evaluate(std::span<const double> z) const override { return evaluate_with_diagnostics(z).value; }

  OdeEvaluation evaluate_with_diagnostics(std::span<const double> z, int steps = 0) const {
    const int m = p_.state_dim();
    Eigen::MatrixXd a = p_.a0;
    Eigen::MatrixXd b = p_.b0;
    Eigen::VectorXd u = p_.u0;
    for (std::size_t j = 0; j < p_.a_lin.size(); ++j) a += z[j] * p_.a_lin[j];
    for (std::size_t j = 0; j < p_.b_lin.size(); ++j) b += z[j] * p_.b_lin[j];
    for (std::size_t j = 0; j < p_.u_lin.size(); ++j) u += z[j] * p_.u_lin[j];
    if (p_.spectral_clamp && m > 0) {
      const double bound = OdeParams::kSpectralBound / p_.horizon;
      const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
      if (norm > bound) a *= bound / norm;
    }
    std::vector<double> amps;
    for (const auto& f : p_.forcing) {
      double amp = f.amp0;
      for (int j = 0; j < f.amp_lin.size(); ++j) amp += f.amp_lin(j) * z[static_cast<std::size_t>(j)];
      amps.push_back(amp);
    }
    auto rhs = [&](double t, const Eigen::VectorXd& y) {
      Eigen::VectorXd dy = a * y + (b * y).array().tanh().matrix() + u;
      for (std::size_t q = 0; q < p_.forcing.size(); ++q) {
        const auto& f = p_.forcing[q];
        dy += (amps[q] * std::sin(f.omega * t + f.phase)) * f.direction;
      }
      return dy;
    };
    bool clamped = false;
    auto guard = [&](Eigen::VectorXd& y) {
      for (int i = 0; i < y.size(); ++i) {
        double& v = y(i);
        if (std::isnan(v)) {
          v = 0.0;
          clamped = true;
        } else if (std::abs(v) > OdeParams::kStateLimit) {
          v = std::copysign(OdeParams::kStateLimit, v);
          clamped = true;
        }
      }
    };
    Eigen::VectorXd y =
        rk4_integrate(rhs, Eigen::VectorXd(p_.y0), 0.0, p_.horizon, steps > 0 ? steps : p_.steps, guard);
    return {p_.readout.dot(y), y, clamped};
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "ode(state=" << p_.state_dim() << ", steps=" << p_.steps << ", forcing=" << p_.forcing.size() << ")";
    return os.str();
  }

  const OdeParams& params() const { return p_; }

 private:
  int dim_;
  OdeParams p_;
};

/// family_params: {"state_dim": int, "steps": int}.
inline std::shared_ptr<const OdeFunction> ode_function(int dim, std::uint64_t seed,
                                                        const json& overrides = json::object()) {
  check_param_keys(overrides, {"state_dim", "steps"}, Family::ode);
  const int state_dim = overrides.value("state_dim", 0);
  const int steps = overrides.value("steps", 0);
  if (overrides.contains("state_dim") && state_dim < 1) throw ConfigError("ode state_dim must be >= 1");
  if (overrides.contains("steps") && steps < 1) throw ConfigError("ode steps must be >= 1");
  Rng rng(derive_seed(seed, "ode"));
  return std::make_shared<OdeFunction>(dim, OdeParams::sample(dim, rng, state_dim, steps));
}

}  // namespace gptopt::functions
