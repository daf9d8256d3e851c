#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/objective.hpp"

namespace gptopt {

using json = nlohmann::json;

/// Ordered record of one optimization run. The first n_init entries are the
/// random initialization; the rest are optimizer decisions.
struct Trajectory {
  std::string function_id;
  int dim = 0;
  std::string optimizer_id;
  std::uint64_t seed = 0;
  std::vector<Point> points;
  std::vector<double> values;
  int n_init = 10;
  /// Optimization step indices (0-based, after init) that used a random fallback.
  std::vector<int> fallback_steps;
  /// Optional per-step diagnostics (inference loops record codes here).
  json provenance = json::object();

  int steps_completed() const { return static_cast<int>(values.size()) - n_init; }

  double best_value() const {
    double b = std::numeric_limits<double>::infinity();
    for (double v : values) b = std::min(b, v);
    return b;
  }

  /// Best value among the first `count` evaluations.
  double best_within(std::size_t count) const {
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min(count, values.size()); ++i) b = std::min(b, values[i]);
    return b;
  }

  void append(Point x, double y) {
    points.push_back(std::move(x));
    values.push_back(y);
  }
};

inline void to_json(json& j, const Trajectory& t) {
  std::vector<double> flat;
  flat.reserve(t.points.size() * static_cast<std::size_t>(t.dim));
  for (const auto& p : t.points) flat.insert(flat.end(), p.begin(), p.end());
  j = json{{"function_id", t.function_id}, {"optimizer_id", t.optimizer_id},
           {"seed", t.seed},               {"dim", t.dim},
           {"points", flat},               {"values", t.values},
           {"n_init", t.n_init},           {"fallback_steps", t.fallback_steps}};
  if (!t.provenance.empty()) j["provenance"] = t.provenance;
}

/// Accepts flat row-major `points` or a list of rows.
inline void from_json(const json& j, Trajectory& t) {
  t.function_id = j.at("function_id").get<std::string>();
  t.optimizer_id = j.at("optimizer_id").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.dim = j.at("dim").get<int>();
  t.values = j.at("values").get<std::vector<double>>();
  t.n_init = j.value("n_init", 10);
  t.fallback_steps = j.value("fallback_steps", std::vector<int>{});
  t.provenance = j.value("provenance", json::object());
  if (t.dim < 1) throw ConfigError("trajectory dim must be positive");
  const auto& pts = j.at("points");
  t.points.clear();
  if (!pts.empty() && pts.front().is_array()) {
    for (const auto& row : pts) t.points.push_back(row.get<Point>());
  } else {
    const auto flat = pts.get<std::vector<double>>();
    if (flat.size() % static_cast<std::size_t>(t.dim) != 0) throw ConfigError("points length is not a multiple of dim");
    for (std::size_t i = 0; i < flat.size(); i += static_cast<std::size_t>(t.dim))
      t.points.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i),
                            flat.begin() + static_cast<std::ptrdiff_t>(i) + t.dim);
  }
  if (t.points.size() != t.values.size()) throw ConfigError("trajectory has mismatched points and values");
  for (const auto& p : t.points)
    if (static_cast<int>(p.size()) != t.dim) throw ConfigError("trajectory point has wrong dimension");
}

inline std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file " + path);
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<Trajectory>());
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_trajectories(const std::string& path, const std::vector<Trajectory>& ts, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw ConfigError("cannot write trajectory file " + path);
  for (const auto& t : ts) out << json(t).dump() << '\n';
}

}  // namespace gptopt
