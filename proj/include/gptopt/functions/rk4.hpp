#pragma once

#include <utility>

namespace gptopt::functions {

/// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y).
/// State must support +, and scalar * (Eigen vectors do).
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from t0 to t1. `after_step(y)` may modify the state in place
/// (used for magnitude guards); pass a no-op otherwise.
template <typename State, typename Rhs, typename Guard>
State rk4_integrate(const Rhs& f, State y, double t0, double t1, int steps, Guard&& after_step) {
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    y = rk4_step(f, t0 + i * h, y, h);
    after_step(y);
  }
  return y;
}

template <typename State, typename Rhs>
State rk4_integrate(const Rhs& f, State y, double t0, double t1, int steps) {
  return rk4_integrate(f, std::move(y), t0, t1, steps, [](State&) {});
}

}  // namespace gptopt::functions
