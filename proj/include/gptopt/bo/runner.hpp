#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gptopt/bo/acquisition.hpp"
#include "gptopt/bo/gp.hpp"
#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/core/trajectory.hpp"

namespace gptopt::bo {

inline constexpr int kDefaultInit = 10;
inline constexpr int kDefaultSteps = 40;

/// The n_init uniform points every optimizer starts from for a given seed.
inline std::vector<Point> initial_points(int dim, std::uint64_t seed, int n_init = kDefaultInit) {
  Rng rng(derive_seed(seed, "init"));
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n_init));
  for (int i = 0; i < n_init; ++i) pts.push_back(rng.unit_point(dim));
  return pts;
}

struct BoOptions {
  int n_init = kDefaultInit;
  int n_steps = kDefaultSteps;
  GpFitOptions fit;
  AcqMaximizerOptions acq;
};

inline std::string bo_optimizer_id(const AcquisitionConfig& cfg) { return "bo-" + cfg.id(); }

/// Continue a BO run from the points already in `traj` until it holds
/// n_init + n_steps evaluations.
inline void extend_bo_trajectory(const Objective& fn, const AcquisitionConfig& cfg, Trajectory& traj,
                                 const BoOptions& opt = {}) {
  const int total = opt.n_init + opt.n_steps;
  while (static_cast<int>(traj.values.size()) < total) {
    const int step = static_cast<int>(traj.values.size()) - opt.n_init;
    const auto step_tag = static_cast<std::uint64_t>(step);
    Point next;
    try {
      GpFitOptions fit = opt.fit;
      fit.seed = derive_seed(traj.seed, {fnv1a64("fit"), step_tag});
      const GpModel model = fit_gp(traj.points, traj.values, fit);
      const auto acq =
          maximize_acquisition(model, cfg, traj.best_value(), derive_seed(traj.seed, {fnv1a64("acq"), step_tag}), opt.acq);
      next = acq.x;
    } catch (const SurrogateError&) {
      Rng rng(derive_seed(traj.seed, {fnv1a64("fallback"), step_tag}));
      next = rng.unit_point(fn.dim);
      traj.fallback_steps.push_back(step);
    }
    const double y = fn(next);
    traj.append(std::move(next), y);
  }
}

/// n_init seeded uniform evaluations followed by n_steps fit/maximize/evaluate rounds.
inline Trajectory run_bo_trajectory(const Objective& fn, const AcquisitionConfig& cfg, std::uint64_t seed,
                                    const BoOptions& opt = {}) {
  if (opt.n_init < 1 || opt.n_steps < 0) throw ConfigError("n_init must be >= 1 and n_steps >= 0");
  Trajectory t;
  t.function_id = fn.id;
  t.dim = fn.dim;
  t.optimizer_id = bo_optimizer_id(cfg);
  t.seed = seed;
  t.n_init = opt.n_init;
  for (auto& x : initial_points(fn.dim, seed, opt.n_init)) {
    const double y = fn(x);
    t.append(std::move(x), y);
  }
  extend_bo_trajectory(fn, cfg, t, opt);
  return t;
}

/// One trajectory per grid variant, all sharing the same initial design.
/// A variant that throws yields a trajectory truncated at the failure, with
/// provenance.error set.
inline std::vector<Trajectory> run_variant_grid(const Objective& fn, std::uint64_t seed, const BoOptions& opt = {}) {
  std::vector<Trajectory> out;
  for (const auto& cfg : variant_grid()) {
    Trajectory t;
    t.function_id = fn.id;
    t.dim = fn.dim;
    t.optimizer_id = bo_optimizer_id(cfg);
    t.seed = seed;
    t.n_init = opt.n_init;
    try {
      for (auto& x : initial_points(fn.dim, seed, opt.n_init)) {
        const double y = fn(x);
        t.append(std::move(x), y);
      }
      extend_bo_trajectory(fn, cfg, t, opt);
    } catch (const std::exception& e) {
      t.provenance["error"] = e.what();
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace gptopt::bo
