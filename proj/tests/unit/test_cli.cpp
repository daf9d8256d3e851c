#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GPTOPT_CLI_PATH;

struct CliResult {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gptopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + kCli + " " + args + " 2>&1";
    FILE* p = ::popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int status = ::pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
  }

  std::vector<json> jsonl(const std::string& rel) const {
    std::ifstream in(dir_ / rel);
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(json::parse(line));
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ListBenchmarks) {
  const auto r = run("list-benchmarks");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\"branin\""), std::string::npos);
  const auto first = json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(first["dims"].size(), first["f_star"].size());
}

TEST_F(Cli, GenCensusAndOverwriteGuard) {
  auto r = run("gen --dims 2 3 4 5 6 --per-family 5000 --with-augmented --dry-run");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("50000"), std::string::npos) << r.out;
  r = run("gen --dims 2 --per-family 2 -o fns.jsonl");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(jsonl("fns.jsonl").size(), 10u);
  EXPECT_TRUE(fs::exists(dir_ / "fns.jsonl.config.toml"));
  EXPECT_EQ(run("gen --dims 2 --per-family 2 -o fns.jsonl").code, 2);
  EXPECT_EQ(run("--force gen --dims 2 --per-family 1 -o fns.jsonl").code, 0);
  EXPECT_EQ(jsonl("fns.jsonl").size(), 5u);
}

TEST_F(Cli, ConfigSnapshotReproducesTheRun) {
  ASSERT_EQ(run("--seed 9 gen --dims 3 --per-family 1 --families fourier nn -o a.jsonl").code, 0);
  const auto r = run("--config a.jsonl.config.toml gen -o b.jsonl");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream a(dir_ / "a.jsonl"), b(dir_ / "b.jsonl");
  const std::string ca((std::istreambuf_iterator<char>(a)), {}), cb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(ca, cb);
}

TEST_F(Cli, TraceDatasetPipeline) {
  ASSERT_EQ(run("gen --dims 2 --per-family 1 --families fourier -o fns.jsonl").code, 0);
  auto r = run("trace --manifest fns.jsonl --n-steps 5 -o traces");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto trajs = jsonl("traces/trajectories.jsonl");
  EXPECT_EQ(trajs.size(), 10u);
  for (const auto& t : trajs) EXPECT_EQ(t["values"].size(), 15u);
  EXPECT_TRUE(fs::exists(dir_ / "traces/resolved_config.toml"));
  EXPECT_EQ(run("--resume trace --manifest fns.jsonl --n-steps 5 -o traces").code, 0);
  EXPECT_EQ(jsonl("traces/trajectories.jsonl").size(), 10u);

  r = run("dataset --traces traces/trajectories.jsonl --step-counts 1 5 --k 3 -o ds");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(jsonl("ds/dataset.jsonl").size(), 2u * 3u);
}

TEST_F(Cli, InferWithMockPolicy) {
  const auto r = run("infer --benchmark branin:2 --endpoint mock:stub --budget 5 -o inf");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto trajs = jsonl("inf/trajectories.jsonl");
  ASSERT_EQ(trajs.size(), 1u);
  EXPECT_EQ(trajs[0]["values"].size(), 15u);
  EXPECT_EQ(trajs[0]["provenance"]["steps"].size(), 5u);
}

TEST_F(Cli, EvalAndReport) {
  auto r = run("eval --benchmark branin:2 sphere:2 --methods random policy:mock:best --seeds 2 --budget 3 -o ev");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "ev/report/performance_P.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "ev/report/summary.json"));
  r = run("report --records ev/records -o rep --max-step 2");
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(dir_ / "rep/summary.json");
  const auto s = json::parse(in);
  EXPECT_EQ(s["max_step"], 2);
  EXPECT_EQ(s["cells_per_method"], 4);
}

TEST_F(Cli, BadInputsExitNonZero) {
  EXPECT_EQ(run("infer --benchmark nope:2 --endpoint mock:stub -o x").code, 1);
  EXPECT_EQ(run("eval --benchmark branin:2 --methods grid -o y").code, 2);
  EXPECT_NE(run("trace").code, 0);
  EXPECT_NE(run("frobnicate").code, 0);
}
