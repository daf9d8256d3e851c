#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptopt/bo/runner.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/dataset/discretize.hpp"
#include "gptopt/dataset/prompt.hpp"
#include "gptopt/policy/codes.hpp"
#include "gptopt/policy/endpoint.hpp"

namespace gptopt::policy {

/// Schedule position of decision j (1-based) in a budget of T: the first
/// decision sees C_min = start and the last sees C_min = end.
struct SchedulePoint {
  int t;
  int T;
};

inline SchedulePoint schedule_point(int decision, int budget) {
  if (budget <= 1) return {0, 1};
  return {decision - 1, budget - 1};
}

/// Prompt for the next decision given the history so far, with inference-time
/// objective codes and n_opt = cfg.budget.
inline dataset::TokenizedPrompt inference_prompt(const Trajectory& traj, int decision, const InferenceConfig& cfg) {
  const auto sp = schedule_point(decision, cfg.budget);
  const auto codes = inference_objective_codes(traj.values, sp.t, sp.T, cfg.c_min_start, cfg.c_min_end);
  const auto flags = dataset::new_best_flags(traj.values);
  dataset::TokenizedPrompt p;
  p.dim = traj.dim;
  p.n_random = traj.n_init;
  p.n_opt = cfg.budget;
  for (std::size_t i = 0; i < traj.values.size(); ++i) {
    dataset::TokenizedStep s{dataset::discretize_actions(traj.points[i]), codes[i], flags[i]};
    (i < static_cast<std::size_t>(traj.n_init) ? p.random_steps : p.response_steps).push_back(std::move(s));
  }
  return p;
}

/// 10 seeded random evaluations (the same stream BO uses), then cfg.budget
/// policy decisions. Each decision renders the history, asks for k proposals,
/// keeps the one with the largest discrete EI against the current incumbent
/// code, and evaluates its bin center. Policy failures fall back to a uniform
/// random point; every decision is logged under provenance["steps"].
inline Trajectory run_inference_loop(const Objective& fn, PolicyEndpoint& endpoint, const InferenceConfig& cfg,
                                     std::uint64_t seed) {
  cfg.validate();
  Trajectory traj;
  traj.function_id = fn.id;
  traj.dim = fn.dim;
  traj.optimizer_id = "policy-" + endpoint.name();
  traj.seed = seed;
  traj.n_init = dataset::kRandomSteps;
  for (auto& x : bo::initial_points(fn.dim, seed, traj.n_init)) {
    const double y = fn(x);
    traj.append(std::move(x), y);
  }
  json steps = json::array();
  for (int decision = 1; decision <= cfg.budget; ++decision) {
    const auto sp = schedule_point(decision, cfg.budget);
    const int incumbent = c_min(sp.t, sp.T, cfg.c_min_start, cfg.c_min_end);
    json log{{"step", decision}, {"c_min", incumbent}, {"incumbent_code", incumbent}};
    Point x;
    try {
      ProposeRequest req{dataset::render_prompt(inference_prompt(traj, decision, cfg)), fn.dim, cfg.k_proposals,
                         cfg.temperature, derive_seed(seed, {fnv1a64("propose"), static_cast<std::uint64_t>(decision)})};
      const auto result = propose(endpoint, req);
      const auto pick = select_proposal(result.proposals, incumbent);
      const auto& chosen = result.proposals[pick];
      x = dataset::decode_actions(chosen.action_codes);
      log["selected"] = pick;
      log["n_valid"] = result.proposals.size();
      log["action_codes"] = chosen.action_codes;
      log["expected_improvement"] = discrete_expected_improvement(chosen.objective_dist, incumbent);
      log["predicted_mean_code"] = dist_mean(chosen.objective_dist);
      if (!result.diagnostics.empty()) log["diagnostics"] = result.diagnostics;
      log["fallback"] = false;
    } catch (const std::exception& e) {
      Rng rng(derive_seed(seed, {fnv1a64("fallback"), static_cast<std::uint64_t>(decision)}));
      x = rng.unit_point(fn.dim);
      traj.fallback_steps.push_back(decision - 1);
      log["fallback"] = true;
      log["error"] = e.what();
    }
    const double y = fn(x);
    log["realized_code"] = code_on_scale(y, traj.values, sp.t, sp.T, cfg.c_min_start, cfg.c_min_end);
    traj.append(std::move(x), y);
    steps.push_back(std::move(log));
  }
  traj.provenance = json{{"endpoint", endpoint.name()},
                         {"k_proposals", cfg.k_proposals},
                         {"temperature", cfg.temperature},
                         {"budget", cfg.budget},
                         {"steps", std::move(steps)}};
  return traj;
}

}  // namespace gptopt::policy
