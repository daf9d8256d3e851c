#include <gtest/gtest.h>

#include <set>

#include "desk_corpus.hpp"
#include "oracles.hpp"
#include "gptopt/dataset/export.hpp"

using namespace gptopt;
using namespace gptopt::fixtures;
using namespace gptopt::dataset;

namespace {

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("gptopt_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST(TopK, HandExample) {
  Trajectory a, b;
  a.function_id = b.function_id = "f";
  a.optimizer_id = "a";
  b.optimizer_id = "b";
  for (int i = 0; i < 15; ++i) {
    a.append({0.0}, i == 12 ? 3.0 : 9.0);
    b.append({0.0}, i == 14 ? 2.0 : 9.0);
  }
  const auto sel = select_top_k({a, b}, 1, {5});
  ASSERT_EQ(sel.entries.size(), 1u);
  EXPECT_EQ(sel.entries[0].source, 1u);
  EXPECT_EQ(sel.entries[0].trajectory.values.size(), 15u);
}

TEST(TopK, MatchesBruteForceOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ts = random_trajectory_group(rng, 10, 40);
    const int k = rng.uniform_int(1, 6);
    const auto sel = select_top_k(ts, k, default_step_counts());
    for (int c : default_step_counts()) {
      std::set<std::size_t> got;
      int expected_rank = 0;
      for (const auto& e : sel.entries)
        if (e.step_count == c) {
          got.insert(e.source);
          EXPECT_EQ(e.rank, expected_rank++);
          EXPECT_EQ(e.trajectory.steps_completed(), c);
        }
      EXPECT_EQ(got, brute_force_top_k(ts, k, c)) << "trial " << trial << " c=" << c;
    }
  }
}

TEST(TopK, SelectedNeverWorseThanExcluded) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ts = random_trajectory_group(rng, 12, 40);
    const auto sel = select_top_k(ts, 3, {20});
    std::set<std::size_t> in;
    double worst_in = -1e300;
    for (const auto& e : sel.entries) {
      in.insert(e.source);
      worst_in = std::max(worst_in, ts[e.source].best_within(30));
    }
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (!in.contains(i) && ts[i].steps_completed() >= 20) {
        EXPECT_GE(ts[i].best_within(30), worst_in);
      }
  }
}

TEST(TopK, ShortGroupsAreFlaggedAndCounted) {
  Rng rng(23);
  auto ts = random_trajectory_group(rng, 3, 40);
  for (auto& t : ts) {
    t.points.resize(10 + 40);
    t.values.resize(10 + 40);
    while (t.values.size() < 50) t.append(rng.unit_point(2), 1.0);
  }
  const auto sel = select_top_k(ts, 5, default_step_counts());
  EXPECT_EQ(sel.entries.size(), 8u * 3u);
  EXPECT_EQ(sel.short_step_counts, default_step_counts());
  EXPECT_THROW(select_top_k(ts, 0, {5}), ConfigError);
  EXPECT_THROW(select_top_k(ts, 1, {10, 5}), ConfigError);
}

TEST(Augmentation, IdentityIsANoOp) {
  Rng rng(1);
  const auto t = random_trajectory_group(rng, 1, 20)[0];
  const auto same = augment_trajectory(t, TrajectoryTransform::identity(2, 10));
  EXPECT_EQ(same.points, t.points);
  EXPECT_EQ(same.values, t.values);
}

TEST(Augmentation, PreservesInitMultisetAndIncumbents) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = random_trajectory_group(rng, 1, 40)[0];
    t.dim = 2;
    const auto a = augment_trajectory(t, static_cast<std::uint64_t>(trial));
    auto signature = [](const Trajectory& x, std::size_t i) {
      std::vector<double> s;
      for (double c : x.points[i]) s.push_back(std::abs(c));
      std::sort(s.begin(), s.end());
      return std::make_pair(s, x.values[i]);
    };
    std::multiset<std::pair<std::vector<double>, double>> before, after;
    for (std::size_t i = 0; i < 10; ++i) {
      before.insert(signature(t, i));
      after.insert(signature(a, i));
    }
    EXPECT_EQ(before, after);
    for (std::size_t i = 10; i < t.values.size(); ++i) EXPECT_EQ(a.values[i], t.values[i]);
    for (int c : default_step_counts())
      if (t.steps_completed() >= c) {
        EXPECT_EQ(a.best_within(10 + c), t.best_within(10 + c));
      }
  }
}

TEST(Augmentation, AxisSwapAndFlipAreApplied) {
  Trajectory t;
  t.dim = 2;
  t.n_init = 1;
  t.append({0.25, -0.5}, 1.0);
  TrajectoryTransform tf{{1, 0}, {true, false}, {0}};
  const auto a = augment_trajectory(t, tf);
  EXPECT_EQ(a.points[0], (Point{0.5, 0.25}));
}

TEST(Export, DeskCorpusCountsReparseAndSizeBand) {
  const auto corpus = fixtures::desk_corpus();
  const auto dir = temp_dir("export_desk");
  std::filesystem::create_directories(dir);
  const auto src = dir + "/traces.jsonl";
  write_trajectories(src, corpus);
  DatasetManifest m;
  m.sources = {src};
  m.output_dir = dir + "/out";
  const auto summary = export_dataset(m, 2);
  EXPECT_EQ(summary.functions, 100u);
  EXPECT_EQ(summary.entries, 8u * 5u * 100u);
  for (int c : default_step_counts()) EXPECT_EQ(summary.entries_per_step_count.at(c), 500u);
  EXPECT_TRUE(summary.short_functions.empty());

  std::ifstream in(m.output_dir + "/dataset.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto r = json::parse(line).get<DatasetRecord>();
    const auto p = parse_prompt(r.prompt);
    EXPECT_FALSE(p.incomplete());
    EXPECT_EQ(static_cast<int>(p.response_steps.size()), r.step_count);
    EXPECT_EQ(p.n_opt, r.step_count);
    if (r.step_count == 40) {
      EXPECT_GE(r.prompt.size(), 1500u);
      EXPECT_LE(r.prompt.size(), 4000u);
    }
    ++n;
  }
  EXPECT_EQ(n, 4000u);
  EXPECT_TRUE(std::filesystem::exists(m.output_dir + "/summary.json"));
  EXPECT_TRUE(std::filesystem::exists(m.output_dir + "/manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST(Export, AugmentationPassesAndShardsAreWorkerIndependent) {
  auto corpus = fixtures::desk_corpus(10);
  corpus.resize(60);  // ten functions
  const auto dir = temp_dir("export_shards");
  std::filesystem::create_directories(dir);
  const auto src = dir + "/traces.jsonl";
  write_trajectories(src, corpus);
  DatasetManifest m;
  m.sources = {src};
  m.step_counts = {5, 10};
  m.augmentation_passes = 3;
  m.shards = 3;
  m.output_dir = dir + "/a";
  const auto a = export_dataset(m, 1);
  m.output_dir = dir + "/b";
  const auto b = export_dataset(m, 3);
  EXPECT_EQ(a.entries, 2u * 5u * 10u * 3u);
  EXPECT_EQ(a.augmented_entries, 2u * 5u * 10u * 2u);
  ASSERT_EQ(a.files.size(), 3u);
  for (int s = 0; s < 3; ++s) {
    std::ifstream fa(a.files[static_cast<std::size_t>(s)]), fb(b.files[static_cast<std::size_t>(s)]);
    const std::string ca((std::istreambuf_iterator<char>(fa)), {}), cb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_EQ(ca, cb);
  }
  EXPECT_EQ(shard_name(0, 1), "dataset.jsonl");
  EXPECT_EQ(shard_name(2, 3), "dataset-00002-of-00003.jsonl");
  std::filesystem::remove_all(dir);
}

TEST(Export, InvalidManifestListsEveryProblem) {
  DatasetManifest m;
  m.k = 0;
  m.shards = 0;
  try {
    m.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* key : {"sources", "k:", "output_dir", "shards"}) EXPECT_NE(msg.find(key), std::string::npos) << key;
  }
}
