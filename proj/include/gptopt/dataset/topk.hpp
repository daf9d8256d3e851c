#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/core/trajectory.hpp"

namespace gptopt::dataset {

inline const std::vector<int>& default_step_counts() {
  static const std::vector<int> c = {5, 10, 15, 20, 25, 30, 35, 40};
  return c;
}

struct SelectedEntry {
  int step_count = 0;
  /// 0-based position in the ranking at this step count.
  int rank = 0;
  /// Index into the input trajectory list.
  std::size_t source = 0;
  /// Source trajectory truncated to n_init + step_count evaluations.
  Trajectory trajectory;
};

struct Selection {
  std::vector<SelectedEntry> entries;
  /// Step counts where fewer than k eligible trajectories were available.
  std::vector<int> short_step_counts;
};

inline Trajectory truncate_trajectory(const Trajectory& t, int steps) {
  Trajectory out = t;
  const auto n = static_cast<std::size_t>(t.n_init + steps);
  out.points.resize(n);
  out.values.resize(n);
  std::erase_if(out.fallback_steps, [&](int s) { return s >= steps; });
  return out;
}

/// Per step count c: rank trajectories by their best value within the first
/// n_init + c evaluations, ties by optimizer_id then seed, and keep the first k.
/// Trajectories shorter than c steps are not eligible at c.
inline Selection select_top_k(const std::vector<Trajectory>& trajs, int k, const std::vector<int>& step_counts) {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!std::is_sorted(step_counts.begin(), step_counts.end())) throw ConfigError("step counts must be sorted");
  for (int c : step_counts)
    if (c < 0) throw ConfigError("step counts must be non-negative");
  for (const auto& t : trajs)
    if (t.function_id != trajs.front().function_id || t.n_init != trajs.front().n_init)
      throw ConfigError("top-k selection needs trajectories of one function with a common n_init");

  Selection sel;
  for (int c : step_counts) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < trajs.size(); ++i)
      if (trajs[i].steps_completed() >= c) eligible.push_back(i);
    std::vector<double> score(trajs.size());
    for (std::size_t i : eligible) score[i] = trajs[i].best_within(static_cast<std::size_t>(trajs[i].n_init + c));
    std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(score[a], trajs[a].optimizer_id, trajs[a].seed) <
             std::tie(score[b], trajs[b].optimizer_id, trajs[b].seed);
    });
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), eligible.size());
    if (take < static_cast<std::size_t>(k)) sel.short_step_counts.push_back(c);
    for (std::size_t r = 0; r < take; ++r)
      sel.entries.push_back({c, static_cast<int>(r), eligible[r], truncate_trajectory(trajs[eligible[r]], c)});
  }
  return sel;
}

/// Axis permutation, sign flips and init-block reordering.
struct TrajectoryTransform {
  /// New coordinate i takes old coordinate axis_order[i].
  std::vector<int> axis_order;
  std::vector<bool> flip;
  /// New init entry i takes old init entry init_order[i].
  std::vector<int> init_order;

  static TrajectoryTransform identity(int dim, int n_init) {
    TrajectoryTransform t;
    t.axis_order.resize(static_cast<std::size_t>(dim));
    std::iota(t.axis_order.begin(), t.axis_order.end(), 0);
    t.flip.assign(static_cast<std::size_t>(dim), false);
    t.init_order.resize(static_cast<std::size_t>(n_init));
    std::iota(t.init_order.begin(), t.init_order.end(), 0);
    return t;
  }

  static TrajectoryTransform sample(int dim, int n_init, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "trajectory-augment"));
    TrajectoryTransform t;
    t.axis_order = rng.permutation(dim);
    for (int i = 0; i < dim; ++i) t.flip.push_back(rng.bernoulli(0.5));
    t.init_order = rng.permutation(n_init);
    return t;
  }
};

inline Trajectory augment_trajectory(const Trajectory& traj, const TrajectoryTransform& tf) {
  const auto d = static_cast<std::size_t>(traj.dim);
  const auto n_init = static_cast<std::size_t>(traj.n_init);
  if (tf.axis_order.size() != d || tf.flip.size() != d || tf.init_order.size() != n_init)
    throw ConfigError("trajectory transform does not match trajectory shape");
  Trajectory out = traj;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const std::size_t src = i < n_init ? static_cast<std::size_t>(tf.init_order[i]) : i;
    out.values[i] = traj.values[src];
    for (std::size_t j = 0; j < d; ++j) {
      const double v = traj.points[src][static_cast<std::size_t>(tf.axis_order[j])];
      out.points[i][j] = tf.flip[j] ? -v : v;
    }
  }
  return out;
}

inline Trajectory augment_trajectory(const Trajectory& traj, std::uint64_t seed) {
  return augment_trajectory(traj, TrajectoryTransform::sample(traj.dim, traj.n_init, seed));
}

}  // namespace gptopt::dataset
