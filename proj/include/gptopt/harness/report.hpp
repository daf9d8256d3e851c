#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/harness/metrics.hpp"

namespace gptopt::harness {

/// CSV with header "step,method,mean,se", one row per (step, method).
inline std::string curves_csv(const std::vector<MethodCurve>& curves) {
  std::string out = "step,method,mean,se\n";
  char buf[64];
  if (curves.empty()) return out;
  for (std::size_t step = 0; step < curves.front().mean.size(); ++step)
    for (const auto& c : curves) {
      out += std::to_string(step) + "," + c.method_id + ",";
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c.mean[step], c.se[step]);
      out += buf;
    }
  return out;
}

/// Summary with final-step P and S per method, pairwise win rates at the
/// final step, the census and any exclusions or oracle corrections.
inline json report_summary(const EvalReport& rep, const std::vector<RunRecord>& records) {
  json methods = json::object();
  for (std::size_t i = 0; i < rep.performance.size(); ++i) {
    const auto& p = rep.performance[i];
    const auto& s = rep.score[i];
    methods[p.method_id] = {{"P_final_mean", p.mean.back()}, {"P_final_se", p.se.back()},
                            {"S_final_mean", s.mean.back()}, {"S_final_se", s.se.back()}};
  }
  json wins = json::object();
  for (const auto& m : rep.methods) {
    std::vector<std::string> others;
    for (const auto& o : rep.methods)
      if (o != m) others.push_back(o);
    if (others.empty()) continue;
    const auto w = win_rate(m, others, records, rep.max_step);
    wins[m] = {{"overall", w.overall}, {"per_baseline", w.per_baseline}};
  }
  return json{{"metric", {{"P", "normalized performance (best - f_star)/(f_median_init - f_star), lower is better"},
                          {"S", "score 1 - P, higher is better"}}},
              {"n_splits", rep.n_splits},
              {"max_step", rep.max_step},
              {"methods", methods},
              {"win_rate_final_step", wins},
              {"functions", rep.functions.size()},
              {"cells_per_method", rep.cells},
              {"excluded_cells", rep.excluded_cells},
              {"stale_oracles", rep.stale_oracles}};
}

/// Writes performance_P.csv, score_S.csv and summary.json into dir.
inline std::vector<std::string> write_reports(const EvalReport& rep, const std::vector<RunRecord>& records,
                                              const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::trunc);
    out << body;
    if (!out) throw ConfigError("cannot write " + path);
    written.push_back(path);
  };
  put("performance_P.csv", curves_csv(rep.performance));
  put("score_S.csv", curves_csv(rep.score));
  put("summary.json", report_summary(rep, records).dump(2) + "\n");
  return written;
}

}  // namespace gptopt::harness
