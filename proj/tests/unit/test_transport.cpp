#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "gptopt/benchmarks/benchmarks.hpp"
#include "gptopt/policy/loop.hpp"
#include "gptopt/policy/mocks.hpp"
#include "gptopt/policy/serve.hpp"
#include "reference_prompt.hpp"

using namespace gptopt;
using namespace gptopt::policy;

namespace {

const std::string kStub = GPTOPT_STUB_PATH;

ProposeRequest reference_request(int k = 4) {
  return {fixtures::reference_prompt_text(), 2, k, 1.5, 3};
}

Objective branin() { return benchmarks::to_unit_domain(benchmarks::load_benchmark("branin", 2)); }

}  // namespace

TEST(Subprocess, StubAnswersDenseAndSparse) {
  for (bool sparse : {false, true}) {
    SubprocessEndpoint ep(kStub + (sparse ? " --sparse" : ""), 10.0);
    const json raw = ep.call(json(reference_request()));
    ASSERT_TRUE(raw.contains("proposals"));
    const auto& dist = raw["proposals"][0]["objective_dist"];
    EXPECT_EQ(dist.is_object(), sparse);
    const auto r = propose(ep, reference_request());
    ASSERT_EQ(r.proposals.size(), 4u);
    EXPECT_EQ(r.proposals[0].action_codes, (std::vector<int>{500, 500}));
    EXPECT_EQ(r.proposals[0].objective_dist, point_mass(400));
  }
}

TEST(Subprocess, ServesManyRequestsOnOneProcess) {
  SubprocessEndpoint ep(kStub + " --policy best", 10.0);
  for (int i = 0; i < 20; ++i) {
    const auto r = propose(ep, reference_request(1 + i % 4));
    EXPECT_EQ(r.proposals.size(), static_cast<std::size_t>(1 + i % 4));
    // Lowest code in the reference prompt is 206, first at response step 4.
    EXPECT_EQ(r.proposals[0].action_codes, (std::vector<int>{446, 640}));
  }
}

TEST(Subprocess, BadRequestYieldsWireError) {
  SubprocessEndpoint ep(kStub, 10.0);
  const json reply = ep.call(json{{"dim", 2}});
  ASSERT_TRUE(reply.contains("error"));
  EXPECT_THROW(parse_propose_response(reply, 2), InferenceError);
}

TEST(Subprocess, TimeoutAndExitBecomeInferenceErrors) {
  {
    SubprocessEndpoint ep("sleep 5", 0.2);
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_THROW(ep.call(json(reference_request())), InferenceError);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
  }
  {
    SubprocessEndpoint ep("true", 5.0);
    EXPECT_THROW(ep.call(json(reference_request())), InferenceError);
  }
  {
    SubprocessEndpoint ep("echo not-json; sleep 1", 5.0);
    EXPECT_THROW(ep.call(json(reference_request())), InferenceError);
  }
}

TEST(Subprocess, InferenceLoopEndToEnd) {
  InferenceConfig cfg;
  cfg.budget = 5;
  auto ep = make_endpoint("subprocess:" + kStub + " --sparse", 10.0);
  const auto t = run_inference_loop(branin(), *ep, cfg, 11);
  ASSERT_EQ(t.values.size(), 15u);
  EXPECT_TRUE(t.fallback_steps.empty());
  for (std::size_t i = 10; i < 15; ++i) EXPECT_EQ(t.points[i], (Point{dataset::decode_coordinate(500), dataset::decode_coordinate(500)}));
}

TEST(Jsonl, ServeLoopAnswersEachLine) {
  std::istringstream in(json(reference_request(2)).dump() + "\n\nnot json\n" + json(reference_request(1)).dump() + "\n");
  std::ostringstream out;
  serve_jsonl(StubPolicy(), in, out, true);
  std::istringstream lines(out.str());
  std::string a, b, c;
  std::getline(lines, a);
  std::getline(lines, b);
  std::getline(lines, c);
  EXPECT_EQ(json::parse(a)["proposals"].size(), 2u);
  EXPECT_EQ(json::parse(b)["error"]["code"], "bad_json");
  EXPECT_EQ(json::parse(c)["proposals"].size(), 1u);
}

TEST(Http, InProcessServerAndClient) {
  PolicyHttpServer server(std::make_shared<BestPointPolicy>(), "127.0.0.1", 0, true);
  HttpEndpoint ep(server.url(), 10.0);
  const auto r = propose(ep, reference_request());
  ASSERT_EQ(r.proposals.size(), 4u);
  EXPECT_EQ(r.proposals[0].objective_dist, point_mass(206));
  const json err = ep.call(json{{"prompt", 1}});
  EXPECT_TRUE(err.contains("error"));
  InferenceConfig cfg;
  cfg.budget = 3;
  const auto t = run_inference_loop(branin(), ep, cfg, 2);
  EXPECT_EQ(t.values.size(), 13u);
  EXPECT_TRUE(t.fallback_steps.empty());
}

TEST(Http, StubBinaryServesPropose) {
  // The stub prints its URL, then serves until stdin closes (when sleep exits).
  FILE* pipe = ::popen(("sleep 3 | " + kStub + " --port 0").c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  char buf[256] = {0};
  ASSERT_NE(std::fgets(buf, sizeof buf, pipe), nullptr);
  std::string url(buf);
  url.erase(url.find_last_not_of("\r\n") + 1);
  EXPECT_TRUE(url.starts_with("http://127.0.0.1:"));
  {
    HttpEndpoint ep(url, 5.0);
    const auto r = propose(ep, reference_request());
    EXPECT_EQ(r.proposals[0].action_codes, (std::vector<int>{500, 500}));
  }
  ::pclose(pipe);
}

TEST(Http, UnreachableServerIsAnInferenceError) {
  int port;
  {
    PolicyHttpServer server(std::make_shared<StubPolicy>());
    port = server.port();
  }
  HttpEndpoint ep("http://127.0.0.1:" + std::to_string(port) + "/propose", 1.0);
  EXPECT_THROW(ep.call(json(reference_request())), InferenceError);
  EXPECT_THROW(HttpEndpoint("https://x", 1.0), ConfigError);
  EXPECT_THROW(HttpEndpoint("http://:80", 1.0), ConfigError);
}
