#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptopt/benchmarks/benchmarks.hpp"
#include "gptopt/bo/runner.hpp"
#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"
#include "gptopt/core/parallel.hpp"
#include "gptopt/core/pattern_search.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/functions/synthetic.hpp"
#include "gptopt/harness/metrics.hpp"
#include "gptopt/policy/loop.hpp"
#include "gptopt/policy/mocks.hpp"

namespace gptopt::harness {

struct OracleOptions {
  int samples_per_chunk = 100000;
  int refine_starts = 32;
  PatternSearchOptions refine{0.05, 1e-7, 3000};
};

struct OracleResult {
  double estimate = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
};

/// Minimum over `effort` independent chunks, each of samples_per_chunk uniform
/// draws refined by pattern search from its best refine_starts points. Chunk c
/// depends only on (seed, c), so raising effort never raises the estimate.
inline OracleResult oracle_f_star(const Objective& fn, int effort, std::uint64_t seed = 0, const OracleOptions& opt = {}) {
  if (effort < 1) throw ConfigError("oracle effort must be >= 1");
  OracleResult out;
  const auto n = static_cast<std::size_t>(opt.samples_per_chunk);
  for (int c = 0; c < effort; ++c) {
    Rng rng(derive_seed(seed, {fnv1a64("oracle"), static_cast<std::uint64_t>(c)}));
    std::vector<Point> xs(n);
    std::vector<double> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = rng.unit_point(fn.dim);
      fs[i] = fn(xs[i]);
    }
    out.samples += n;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto starts = std::min(static_cast<std::size_t>(opt.refine_starts), n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                      [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    auto neg = [&](const Point& x) { return -fn(x); };
    for (std::size_t s = 0; s < starts; ++s) {
      const auto r = pattern_search_max(neg, xs[order[s]], -fs[order[s]], opt.refine);
      out.samples += static_cast<std::size_t>(r.evals);
      out.estimate = std::min(out.estimate, -r.value);
    }
  }
  return out;
}

/// One objective in a suite, on [-1,1]^d.
struct SuiteFunction {
  Objective objective;
  /// Known optimum; otherwise estimated by the oracle.
  std::optional<double> f_star;
  std::string id() const { return objective.id; }
};

inline SuiteFunction benchmark_entry(const std::string& name, int dim) {
  const auto b = benchmarks::load_benchmark(name, dim);
  return {benchmarks::to_unit_domain(b), b.f_star};
}

inline SuiteFunction synthetic_entry(const functions::FunctionSpec& spec) {
  return {functions::make_function(spec).as_objective(), std::nullopt};
}

/// A JSONL line is either {"benchmark": name, "dim": d} or a function spec.
inline std::vector<SuiteFunction> load_suite_functions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open function list " + path);
  std::vector<SuiteFunction> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (j.contains("benchmark"))
        out.push_back(benchmark_entry(j["benchmark"].get<std::string>(), j.at("dim").get<int>()));
      else
        out.push_back(synthetic_entry(j.get<functions::FunctionSpec>()));
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Ten 2-D functions: one per synthetic family and five benchmarks.
inline std::vector<SuiteFunction> desk_suite() {
  std::vector<SuiteFunction> out;
  std::uint64_t seed = 1;
  for (auto fam : functions::kAllFamilies) {
    functions::FunctionSpec s;
    s.family = fam;
    s.dim = 2;
    s.seed = seed++;
    out.push_back(synthetic_entry(s));
  }
  for (const char* name : {"branin", "michalewicz", "ackley", "levy", "rastrigin"}) out.push_back(benchmark_entry(name, 2));
  return out;
}

enum class MethodKind { random, bo, policy };

struct MethodSpec {
  MethodKind kind = MethodKind::random;
  bo::AcquisitionConfig acquisition;
  std::string endpoint;

  /// "random", "bo:<acquisition id>" or "policy:<endpoint spec>".
  static MethodSpec parse(const std::string& s) {
    if (s == "random") return {};
    if (s.starts_with("bo:")) return {MethodKind::bo, bo::AcquisitionConfig::from_id(s.substr(3)), {}};
    if (s.starts_with("policy:")) return {MethodKind::policy, {}, s.substr(7)};
    throw ConfigError("unknown method '" + s + "' (expected random, bo:ACQ or policy:ENDPOINT)");
  }

  std::string id() const {
    switch (kind) {
      case MethodKind::random: return "random";
      case MethodKind::bo: return "bo-" + acquisition.id();
      case MethodKind::policy: return "policy-" + endpoint;
    }
    return "?";
  }
};

/// Uniform search sharing the BO initial design.
inline std::vector<double> run_random_search(const Objective& fn, std::uint64_t seed, int n_init, int budget) {
  std::vector<double> values;
  for (const auto& x : bo::initial_points(fn.dim, seed, n_init)) values.push_back(fn(x));
  Rng rng(derive_seed(seed, "random-search"));
  for (int i = 0; i < budget; ++i) values.push_back(fn(rng.unit_point(fn.dim)));
  return values;
}

struct SuiteConfig {
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds;
  int n_init = 10;
  int budget = 40;
  int workers = 1;
  /// Directory for records/<method>.jsonl and oracle.jsonl; empty keeps everything in memory.
  std::string out_dir;
  bool resume = true;
  int oracle_effort = 1;
  OracleOptions oracle;
  bo::BoOptions bo;
  policy::InferenceConfig inference;
};

/// Per-cell seed: the run seed mixed with the function id, so each
/// (function, seed) cell has its own initial design shared by all methods.
inline std::uint64_t cell_seed(const std::string& function_id, std::uint64_t seed) {
  return derive_seed(seed, {fnv1a64(function_id)});
}

inline std::string method_file_name(const std::string& method_id) {
  std::string s;
  for (char c : method_id) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_') ? c : '_';
  return s + ".jsonl";
}

inline RunRecord run_cell(const SuiteFunction& f, double f_star, bool exact, const MethodSpec& m, std::uint64_t seed,
                          const SuiteConfig& cfg) {
  RunRecord r;
  r.function_id = f.id();
  r.method_id = m.id();
  r.seed = seed;
  r.n_init = cfg.n_init;
  r.f_star = f_star;
  r.f_star_exact = exact;
  const auto s = cell_seed(f.id(), seed);
  try {
    switch (m.kind) {
      case MethodKind::random: r.values = run_random_search(f.objective, s, cfg.n_init, cfg.budget); break;
      case MethodKind::bo: {
        auto opt = cfg.bo;
        opt.n_init = cfg.n_init;
        opt.n_steps = cfg.budget;
        const auto t = bo::run_bo_trajectory(f.objective, m.acquisition, s, opt);
        r.values = t.values;
        r.fallback_steps = static_cast<int>(t.fallback_steps.size());
        break;
      }
      case MethodKind::policy: {
        if (cfg.n_init != dataset::kRandomSteps) throw ConfigError("policy methods require n_init = 10");
        auto ep = policy::make_endpoint(m.endpoint, cfg.inference.timeout_seconds);
        auto icfg = cfg.inference;
        icfg.budget = cfg.budget;
        const auto t = policy::run_inference_loop(f.objective, *ep, icfg, s);
        r.values = t.values;
        r.fallback_steps = static_cast<int>(t.fallback_steps.size());
        break;
      }
    }
    r.f_median_init = median_of_init(r.values, cfg.n_init);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

inline bool same_oracle(const json& j, const std::string& id, int effort, const OracleOptions& opt) {
  return j.value("function_id", "") == id && j.value("effort", 0) == effort &&
         j.value("samples_per_chunk", 0) == opt.samples_per_chunk && j.value("refine_starts", 0) == opt.refine_starts;
}

/// f_star per function: known optimum, cached oracle estimate, or a fresh estimate.
inline std::map<std::string, std::pair<double, bool>> resolve_f_stars(const std::vector<SuiteFunction>& fns,
                                                                      const SuiteConfig& cfg) {
  namespace fs = std::filesystem;
  std::map<std::string, std::pair<double, bool>> out;
  std::map<std::string, double> cached;
  const auto cache_path = cfg.out_dir.empty() ? std::string() : (fs::path(cfg.out_dir) / "oracle.jsonl").string();
  if (!cache_path.empty() && fs::exists(cache_path)) {
    std::ifstream in(cache_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      const auto id = j.value("function_id", "");
      if (same_oracle(j, id, cfg.oracle_effort, cfg.oracle)) cached[id] = j.at("f_star").get<double>();
    }
  }
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    if (fns[i].f_star) out[fns[i].id()] = {*fns[i].f_star, true};
    else if (auto it = cached.find(fns[i].id()); it != cached.end()) out[fns[i].id()] = {it->second, false};
    else todo.push_back(i);
  }
  std::vector<OracleResult> est(todo.size());
  parallel_for(todo.size(), cfg.workers, [&](std::size_t k) {
    const auto& f = fns[todo[k]];
    est[k] = oracle_f_star(f.objective, cfg.oracle_effort, fnv1a64(f.id()), cfg.oracle);
  });
  std::ofstream cache;
  if (!cache_path.empty() && !todo.empty()) cache.open(cache_path, std::ios::app);
  for (std::size_t k = 0; k < todo.size(); ++k) {
    const auto& id = fns[todo[k]].id();
    out[id] = {est[k].estimate, false};
    if (cache.is_open())
      cache << json{{"function_id", id}, {"f_star", est[k].estimate}, {"samples", est[k].samples},
                    {"effort", cfg.oracle_effort}, {"samples_per_chunk", cfg.oracle.samples_per_chunk},
                    {"refine_starts", cfg.oracle.refine_starts}}.dump()
            << '\n';
  }
  return out;
}

struct SuiteResult {
  std::vector<RunRecord> records;
  std::size_t computed = 0;
  std::size_t resumed = 0;
  std::size_t failed = 0;
};

/// Run every method on every (function, seed) cell across a worker pool.
/// With out_dir set, records append to records/<method>.jsonl as they finish
/// and existing complete records are reused when resume is on. Finished files
/// are rewritten sorted by (function_id, seed), so their bytes do not depend
/// on scheduling. Failed cells are recorded with an error.
inline SuiteResult run_suite(const std::vector<SuiteFunction>& fns, const SuiteConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.methods.empty() || cfg.seeds.empty() || fns.empty()) throw ConfigError("suite needs methods, seeds and functions");
  {
    std::set<std::string> ids;
    for (const auto& f : fns)
      if (!ids.insert(f.id()).second) throw ConfigError("duplicate function id " + f.id());
  }
  const fs::path rec_dir = cfg.out_dir.empty() ? fs::path() : fs::path(cfg.out_dir) / "records";
  if (!cfg.out_dir.empty()) fs::create_directories(rec_dir);

  const auto f_stars = resolve_f_stars(fns, cfg);

  struct Cell {
    std::size_t fn, method;
    std::uint64_t seed;
  };
  SuiteResult res;
  std::map<std::string, std::map<CellKey, RunRecord>> done;
  for (const auto& m : cfg.methods) {
    const auto path = rec_dir / method_file_name(m.id());
    if (cfg.out_dir.empty() || !cfg.resume || !fs::exists(path)) continue;
    for (auto& r : read_records(path.string()))
      if (!r.error && r.steps_completed() >= cfg.budget && r.n_init == cfg.n_init)
        done[m.id()].insert_or_assign(CellKey{r.function_id, r.seed}, std::move(r));
  }
  std::vector<Cell> pending;
  std::vector<RunRecord> records;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
    for (std::size_t fi = 0; fi < fns.size(); ++fi)
      for (auto seed : cfg.seeds) {
        auto& mdone = done[cfg.methods[mi].id()];
        if (auto it = mdone.find({fns[fi].id(), seed}); it != mdone.end()) {
          records.push_back(it->second);
          ++res.resumed;
        } else {
          pending.push_back({fi, mi, seed});
        }
      }

  std::map<std::string, std::ofstream> sinks;
  if (!cfg.out_dir.empty())
    for (const auto& m : cfg.methods) {
      const auto path = rec_dir / method_file_name(m.id());
      if (!cfg.resume) fs::remove(path);
      sinks[m.id()].open(path, std::ios::app);
    }
  std::mutex mu;
  std::vector<RunRecord> fresh(pending.size());
  parallel_for(pending.size(), cfg.workers, [&](std::size_t i) {
    const auto& c = pending[i];
    const auto& f = fns[c.fn];
    const auto& [fstar, exact] = f_stars.at(f.id());
    fresh[i] = run_cell(f, fstar, exact, cfg.methods[c.method], c.seed, cfg);
    if (!cfg.out_dir.empty()) {
      std::lock_guard lock(mu);
      auto& out = sinks[fresh[i].method_id];
      out << json(fresh[i]).dump() << '\n';
      out.flush();
    }
  });
  for (auto& r : fresh) {
    if (r.error) ++res.failed;
    records.push_back(std::move(r));
  }
  res.computed = pending.size();
  sinks.clear();

  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.method_id, a.function_id, a.seed) < std::tie(b.method_id, b.function_id, b.seed);
  });
  if (!cfg.out_dir.empty()) {
    for (const auto& m : cfg.methods) {
      std::ofstream out(rec_dir / method_file_name(m.id()), std::ios::trunc);
      for (const auto& r : records)
        if (r.method_id == m.id()) out << json(r).dump() << '\n';
    }
  }
  res.records = std::move(records);
  return res;
}

}  // namespace gptopt::harness
