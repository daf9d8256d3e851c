#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/parallel.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/dataset/prompt.hpp"
#include "gptopt/dataset/topk.hpp"

namespace gptopt::dataset {

struct DatasetManifest {
  std::vector<std::string> sources;
  int k = 5;
  std::vector<int> step_counts = default_step_counts();
  std::uint64_t augmentation_seed = 0;
  /// Copies emitted per selected trajectory: copy 0 is the original, the rest are augmented.
  int augmentation_passes = 1;
  std::string output_dir;
  int shards = 1;

  void validate() const {
    std::vector<std::string> problems;
    if (sources.empty()) problems.push_back("sources: at least one trajectory file is required");
    if (k < 1) problems.push_back("k: must be >= 1");
    if (step_counts.empty()) problems.push_back("step_counts: must not be empty");
    if (!std::is_sorted(step_counts.begin(), step_counts.end())) problems.push_back("step_counts: must be sorted");
    if (std::any_of(step_counts.begin(), step_counts.end(), [](int c) { return c < 0; }))
      problems.push_back("step_counts: must be non-negative");
    if (augmentation_passes < 1) problems.push_back("augmentation_passes: must be >= 1");
    if (output_dir.empty()) problems.push_back("output_dir: required");
    if (shards < 1) problems.push_back("shards: must be >= 1");
    if (!problems.empty()) {
      std::string msg = "invalid dataset manifest:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }
};

inline void to_json(json& j, const DatasetManifest& m) {
  j = json{{"sources", m.sources},
           {"k", m.k},
           {"step_counts", m.step_counts},
           {"augmentation_seed", m.augmentation_seed},
           {"augmentation_passes", m.augmentation_passes},
           {"output_dir", m.output_dir},
           {"shards", m.shards}};
}

inline void from_json(const json& j, DatasetManifest& m) {
  DatasetManifest d;
  m.sources = j.at("sources").get<std::vector<std::string>>();
  m.k = j.value("k", d.k);
  m.step_counts = j.value("step_counts", d.step_counts);
  m.augmentation_seed = j.value("augmentation_seed", d.augmentation_seed);
  m.augmentation_passes = j.value("augmentation_passes", d.augmentation_passes);
  m.output_dir = j.value("output_dir", d.output_dir);
  m.shards = j.value("shards", d.shards);
}

struct DatasetRecord {
  std::string prompt;
  std::string function_id;
  int dim = 0;
  int step_count = 0;
  int rank = 0;
  std::string optimizer_id;
  bool augmented = false;
};

inline void to_json(json& j, const DatasetRecord& r) {
  j = json{{"prompt", r.prompt}, {"function_id", r.function_id}, {"dim", r.dim},
           {"step_count", r.step_count}, {"rank", r.rank}, {"optimizer_id", r.optimizer_id},
           {"augmented", r.augmented}};
}

inline void from_json(const json& j, DatasetRecord& r) {
  r.prompt = j.at("prompt").get<std::string>();
  r.function_id = j.at("function_id").get<std::string>();
  r.dim = j.at("dim").get<int>();
  r.step_count = j.at("step_count").get<int>();
  r.rank = j.at("rank").get<int>();
  r.optimizer_id = j.at("optimizer_id").get<std::string>();
  r.augmented = j.at("augmented").get<bool>();
}

/// Dataset records for one function's trajectories. Each prompt declares
/// n_opt equal to its step count.
inline std::vector<DatasetRecord> build_function_records(const std::vector<Trajectory>& trajs, const DatasetManifest& m,
                                                         std::vector<int>* short_step_counts = nullptr) {
  const auto sel = select_top_k(trajs, m.k, m.step_counts);
  if (short_step_counts) *short_step_counts = sel.short_step_counts;
  std::vector<DatasetRecord> out;
  out.reserve(sel.entries.size() * static_cast<std::size_t>(m.augmentation_passes));
  for (const auto& e : sel.entries) {
    for (int pass = 0; pass < m.augmentation_passes; ++pass) {
      const Trajectory t =
          pass == 0 ? e.trajectory
                    : augment_trajectory(e.trajectory,
                                         derive_seed(m.augmentation_seed,
                                                     {fnv1a64(e.trajectory.function_id),
                                                      static_cast<std::uint64_t>(e.step_count),
                                                      static_cast<std::uint64_t>(e.rank),
                                                      static_cast<std::uint64_t>(pass)}));
      out.push_back({render_prompt(t, e.step_count, e.step_count), t.function_id, t.dim, e.step_count, e.rank,
                     t.optimizer_id, pass > 0});
    }
  }
  return out;
}

struct ExportSummary {
  std::size_t functions = 0;
  std::size_t trajectories = 0;
  std::size_t entries = 0;
  std::map<int, std::size_t> entries_per_step_count;
  std::size_t augmented_entries = 0;
  /// function_id -> step counts with fewer than k candidates.
  std::map<std::string, std::vector<int>> short_functions;
  std::vector<std::string> files;
};

inline void to_json(json& j, const ExportSummary& s) {
  json per_c = json::object();
  for (const auto& [c, n] : s.entries_per_step_count) per_c[std::to_string(c)] = n;
  j = json{{"functions", s.functions},         {"trajectories", s.trajectories},
           {"entries", s.entries},             {"entries_per_step_count", per_c},
           {"augmented_entries", s.augmented_entries}, {"short_functions", s.short_functions},
           {"files", s.files}};
}

inline std::string shard_name(int shard, int shards) {
  if (shards == 1) return "dataset.jsonl";
  char buf[40];
  std::snprintf(buf, sizeof buf, "dataset-%05d-of-%05d.jsonl", shard, shards);
  return buf;
}

/// Select, render and write the dataset. Functions are processed in
/// function_id order and assigned to shards by hash of function_id, so the
/// output is independent of the worker count.
inline ExportSummary export_dataset(const DatasetManifest& m, int workers = 1) {
  m.validate();
  std::map<std::string, std::vector<Trajectory>> by_function;
  ExportSummary summary;
  for (const auto& src : m.sources) {
    for (auto& t : read_trajectories(src)) {
      ++summary.trajectories;
      by_function[t.function_id].push_back(std::move(t));
    }
  }
  std::vector<const std::vector<Trajectory>*> groups;
  std::vector<std::string> ids;
  for (const auto& [id, ts] : by_function) {
    ids.push_back(id);
    groups.push_back(&ts);
  }
  std::vector<std::vector<DatasetRecord>> records(groups.size());
  std::vector<std::vector<int>> shorts(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t i) { records[i] = build_function_records(*groups[i], m, &shorts[i]); });

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(m.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + m.output_dir + ": " + ec.message());
  std::vector<std::ofstream> files;
  for (int s = 0; s < m.shards; ++s) {
    const auto path = (fs::path(m.output_dir) / shard_name(s, m.shards)).string();
    files.emplace_back(path, std::ios::trunc);
    if (!files.back()) throw ConfigError("cannot write dataset file " + path);
    summary.files.push_back(path);
  }
  summary.functions = groups.size();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto& out = files[static_cast<std::size_t>(fnv1a64(ids[i]) % static_cast<std::uint64_t>(m.shards))];
    for (const auto& r : records[i]) {
      out << json(r).dump() << '\n';
      ++summary.entries;
      ++summary.entries_per_step_count[r.step_count];
      if (r.augmented) ++summary.augmented_entries;
    }
    if (!shorts[i].empty()) summary.short_functions[ids[i]] = shorts[i];
  }
  for (std::size_t s = 0; s < files.size(); ++s) {
    files[s].close();
    if (!files[s]) throw ConfigError("failed writing dataset file " + summary.files[s]);
  }
  const auto write_json = [&](const std::string& name, const json& j) {
    const auto path = (fs::path(m.output_dir) / name).string();
    std::ofstream f(path, std::ios::trunc);
    f << j.dump(2) << '\n';
    if (!f) throw ConfigError("cannot write " + path);
  };
  write_json("manifest.json", m);
  write_json("summary.json", summary);
  return summary;
}

}  // namespace gptopt::dataset
