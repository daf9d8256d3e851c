#pragma once

#include <string>
#include <vector>

#include "gptopt/bo/runner.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/functions/synthetic.hpp"

namespace gptopt::fixtures {

inline constexpr int kCorpusFunctionsPerFamily = 20;
inline constexpr int kCorpusRunsPerFunction = 6;

/// 100 two-dimensional synthetic functions (20 per family), each with six
/// seeded 10+40-step uniform-search trajectories sharing the BO initial design.
/// Cheap stand-in for traced corpora when only selection and export
/// arithmetic are under test.
inline std::vector<Trajectory> desk_corpus(int steps = bo::kDefaultSteps) {
  std::vector<Trajectory> out;
  for (auto fam : functions::kAllFamilies)
    for (int s = 0; s < kCorpusFunctionsPerFamily; ++s) {
      const auto fn = functions::make_function({fam, 2, static_cast<std::uint64_t>(1000 + s), std::nullopt, json::object()});
      for (int r = 0; r < kCorpusRunsPerFunction; ++r) {
        Trajectory t;
        t.function_id = fn.id();
        t.dim = 2;
        t.optimizer_id = "uniform-" + std::to_string(r);
        t.seed = static_cast<std::uint64_t>(r);
        for (auto& x : bo::initial_points(2, t.seed)) {
          const double y = fn(x);
          t.append(std::move(x), y);
        }
        Rng rng(derive_seed(t.seed, {fnv1a64(t.function_id), fnv1a64("corpus")}));
        for (int i = 0; i < steps; ++i) {
          auto x = rng.unit_point(2);
          const double y = fn(x);
          t.append(std::move(x), y);
        }
        out.push_back(std::move(t));
      }
    }
  return out;
}

}  // namespace gptopt::fixtures
