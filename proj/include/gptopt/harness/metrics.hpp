#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/random.hpp"

namespace gptopt::harness {

using json = nlohmann::json;

/// Raw result of one method on one (function, seed) cell.
struct RunRecord {
  std::string function_id;
  std::string method_id;
  std::uint64_t seed = 0;
  std::vector<double> values;
  int n_init = 10;
  double f_star = 0.0;
  /// False when f_star is an oracle estimate.
  bool f_star_exact = false;
  double f_median_init = 0.0;
  int fallback_steps = 0;
  /// Set when the cell failed; values may then be partial.
  std::optional<std::string> error;

  int steps_completed() const { return static_cast<int>(values.size()) - n_init; }

  double best_within(std::size_t count) const {
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(count, values.size()); ++i) b = std::min(b, values[i]);
    return b;
  }

  /// Best value after n_init + step evaluations.
  double best_at_step(int step) const { return best_within(static_cast<std::size_t>(n_init + step)); }
};

inline void to_json(json& j, const RunRecord& r) {
  j = json{{"function_id", r.function_id}, {"method_id", r.method_id},   {"seed", r.seed},
           {"values", r.values},           {"n_init", r.n_init},         {"f_star", r.f_star},
           {"f_star_exact", r.f_star_exact}, {"f_median_init", r.f_median_init}, {"fallback_steps", r.fallback_steps}};
  if (r.error) j["error"] = *r.error;
}

inline void from_json(const json& j, RunRecord& r) {
  r.function_id = j.at("function_id").get<std::string>();
  r.method_id = j.at("method_id").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.values = j.at("values").get<std::vector<double>>();
  r.n_init = j.value("n_init", 10);
  r.f_star = j.at("f_star").get<double>();
  r.f_star_exact = j.value("f_star_exact", false);
  r.f_median_init = j.at("f_median_init").get<double>();
  r.fallback_steps = j.value("fallback_steps", 0);
  r.error.reset();
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
}

inline std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open records file " + path);
  std::vector<RunRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<RunRecord>());
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Median of the first n_init values (mean of the middle pair for even n_init).
inline double median_of_init(const std::vector<double>& values, int n_init) {
  if (n_init < 1 || values.size() < static_cast<std::size_t>(n_init)) throw ConfigError("not enough initial values");
  std::vector<double> v(values.begin(), values.begin() + n_init);
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// (best - f_star) / (f_m - f_star), clipped below at 0. Undefined when f_m == f_star.
inline std::optional<double> normalized_performance(double best, double f_star, double f_median) {
  const double den = f_median - f_star;
  if (den == 0.0 || !std::isfinite(den)) return std::nullopt;
  return std::max(0.0, (best - f_star) / den);
}

/// P over the first n_init + at_step evaluations of `r`.
inline std::optional<double> normalized_performance(const RunRecord& r, int at_step) {
  return normalized_performance(r.best_at_step(at_step), r.f_star, r.f_median_init);
}

/// Deterministic split of a function into one of n groups.
inline int split_of(const std::string& function_id, int n_splits) {
  return static_cast<int>(fnv1a64(function_id) % static_cast<std::uint64_t>(n_splits));
}

struct SplitStat {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean of the split means and their standard error (sample sd / sqrt(m)) over
/// the m non-empty splits. A single split has se 0.
inline SplitStat split_statistics(const std::vector<std::vector<double>>& per_split) {
  std::vector<double> means;
  for (const auto& s : per_split) {
    if (s.empty()) continue;
    double sum = 0.0;
    for (double v : s) sum += v;
    means.push_back(sum / static_cast<double>(s.size()));
  }
  SplitStat st;
  if (means.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const auto m = static_cast<double>(means.size());
  for (double v : means) st.mean += v;
  st.mean /= m;
  if (means.size() > 1) {
    double ss = 0.0;
    for (double v : means) ss += (v - st.mean) * (v - st.mean);
    st.se = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  return st;
}

struct MethodCurve {
  std::string method_id;
  /// Indexed by optimization step 0..max_step.
  std::vector<double> mean, se;
};

struct EvalReport {
  int n_splits = 5;
  int max_step = 0;
  std::vector<std::string> methods;
  std::vector<std::string> functions;
  std::size_t cells = 0;
  /// Normalized performance P (lower is better).
  std::vector<MethodCurve> performance;
  /// Score S = 1 - P (higher is better).
  std::vector<MethodCurve> score;
  /// Cells dropped from every method, with the reason.
  std::vector<std::string> excluded_cells;
  /// function_id -> corrected f_star where an observed value beat the stored one.
  std::map<std::string, double> stale_oracles;
};

using CellKey = std::pair<std::string, std::uint64_t>;

namespace detail {

inline std::string cell_name(const CellKey& c) { return c.first + "/seed=" + std::to_string(c.second); }

/// method -> cell -> record, with duplicate detection.
inline std::map<std::string, std::map<CellKey, const RunRecord*>> index_records(const std::vector<RunRecord>& records) {
  std::map<std::string, std::map<CellKey, const RunRecord*>> idx;
  for (const auto& r : records) {
    auto [it, inserted] = idx[r.method_id].emplace(CellKey{r.function_id, r.seed}, &r);
    if (!inserted) throw ConfigError("duplicate record for " + r.method_id + " on " + cell_name(it->first));
  }
  return idx;
}

inline void require_full_grid(const std::map<std::string, std::map<CellKey, const RunRecord*>>& idx) {
  std::set<CellKey> all;
  for (const auto& [m, cells] : idx)
    for (const auto& [c, r] : cells) all.insert(c);
  std::vector<std::string> missing;
  for (const auto& [m, cells] : idx)
    for (const auto& c : all)
      if (!cells.contains(c)) missing.push_back(m + " on " + cell_name(c));
  if (!missing.empty()) {
    std::string msg = "record grid has " + std::to_string(missing.size()) + " missing cells:";
    for (const auto& s : missing) msg += "\n  " + s;
    throw ConfigError(msg);
  }
}

}  // namespace detail

/// Per-method P and S curves over steps 0..max_step. Functions are split by
/// hash of function_id; each split mean averages all its (function, seed)
/// cells. Cells where any method failed or P is undefined are excluded for
/// every method. Where an observed value beats the stored f_star, that
/// function's f_star is lowered to the observed minimum before computing P.
/// max_step < 0 selects the largest step every record reached.
inline EvalReport aggregate(const std::vector<RunRecord>& records, int n_splits = 5, int max_step = -1) {
  if (records.empty()) throw ConfigError("no records to aggregate");
  if (n_splits < 1) throw ConfigError("n_splits must be >= 1");
  const auto idx = detail::index_records(records);
  detail::require_full_grid(idx);

  EvalReport rep;
  rep.n_splits = n_splits;
  for (const auto& [m, cells] : idx) rep.methods.push_back(m);

  std::map<std::string, double> f_star, observed;
  for (const auto& r : records) {
    auto [it, fresh] = f_star.emplace(r.function_id, r.f_star);
    if (!fresh) it->second = std::min(it->second, r.f_star);
    double lo = std::numeric_limits<double>::infinity();
    for (double v : r.values) lo = std::min(lo, v);
    auto [ot, ofresh] = observed.emplace(r.function_id, lo);
    if (!ofresh) ot->second = std::min(ot->second, lo);
  }
  for (auto& [fid, fs] : f_star) {
    rep.functions.push_back(fid);
    if (observed[fid] < fs) {
      fs = observed[fid];
      rep.stale_oracles[fid] = fs;
    }
  }

  std::set<CellKey> excluded;
  int reach = std::numeric_limits<int>::max();
  for (const auto& [m, cells] : idx)
    for (const auto& [c, r] : cells) {
      if (r->error) {
        if (excluded.insert(c).second) rep.excluded_cells.push_back(detail::cell_name(c) + ": " + m + " failed: " + *r->error);
        continue;
      }
      if (!normalized_performance(r->best_at_step(0), f_star[c.first], r->f_median_init)) {
        if (excluded.insert(c).second) rep.excluded_cells.push_back(detail::cell_name(c) + ": init median equals f_star");
        continue;
      }
    }
  for (const auto& [m, cells] : idx)
    for (const auto& [c, r] : cells)
      if (!excluded.contains(c)) reach = std::min(reach, r->steps_completed());
  if (reach == std::numeric_limits<int>::max()) throw ConfigError("every cell was excluded");
  rep.max_step = max_step < 0 ? reach : max_step;
  if (rep.max_step > reach)
    throw ConfigError("max_step " + std::to_string(rep.max_step) + " exceeds the shortest run (" + std::to_string(reach) + ")");
  rep.cells = idx.begin()->second.size() - excluded.size();

  for (const auto& [m, cells] : idx) {
    MethodCurve p{m, {}, {}}, s{m, {}, {}};
    for (int step = 0; step <= rep.max_step; ++step) {
      std::vector<std::vector<double>> per_split(static_cast<std::size_t>(n_splits)), per_split_s(per_split);
      for (const auto& [c, r] : cells) {
        if (excluded.contains(c)) continue;
        const double v = *normalized_performance(r->best_at_step(step), f_star[c.first], r->f_median_init);
        const auto k = static_cast<std::size_t>(split_of(c.first, n_splits));
        per_split[k].push_back(v);
        per_split_s[k].push_back(1.0 - v);
      }
      const auto sp = split_statistics(per_split);
      const auto ss = split_statistics(per_split_s);
      p.mean.push_back(sp.mean);
      p.se.push_back(sp.se);
      s.mean.push_back(ss.mean);
      s.se.push_back(ss.se);
    }
    rep.performance.push_back(std::move(p));
    rep.score.push_back(std::move(s));
  }
  return rep;
}

struct WinRates {
  std::map<std::string, double> per_baseline;
  double overall = 0.0;
};

/// Fraction of (function, seed) cells where `method`'s best after
/// n_init + at_step evaluations is strictly lower than the baseline's; ties count 0.5.
inline WinRates win_rate(const std::string& method, const std::vector<std::string>& baselines,
                         const std::vector<RunRecord>& records, int at_step) {
  const auto idx = detail::index_records(records);
  const auto mit = idx.find(method);
  if (mit == idx.end()) throw ConfigError("no records for method " + method);
  WinRates w;
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& b : baselines) {
    const auto bit = idx.find(b);
    if (bit == idx.end()) throw ConfigError("no records for baseline " + b);
    std::vector<std::string> missing;
    for (const auto& [c, r] : mit->second)
      if (!bit->second.contains(c)) missing.push_back(b + " on " + detail::cell_name(c));
    for (const auto& [c, r] : bit->second)
      if (!mit->second.contains(c)) missing.push_back(method + " on " + detail::cell_name(c));
    if (!missing.empty()) {
      std::string msg = "win rate grids differ:";
      for (const auto& s : missing) msg += "\n  " + s;
      throw ConfigError(msg);
    }
    double wins = 0.0;
    for (const auto& [c, r] : mit->second) {
      const double a = r->best_at_step(at_step), o = bit->second.at(c)->best_at_step(at_step);
      wins += a < o ? 1.0 : (a == o ? 0.5 : 0.0);
    }
    const auto cells = mit->second.size();
    w.per_baseline[b] = cells ? wins / static_cast<double>(cells) : 0.5;
    total += wins;
    n += cells;
  }
  w.overall = n ? total / static_cast<double>(n) : 0.5;
  return w;
}

}  // namespace gptopt::harness
