#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gptopt/policy/mocks.hpp"
#include "gptopt/policy/serve.hpp"

// Serves a built-in policy over the propose wire protocol: newline-delimited
// JSON on stdin/stdout by default, or HTTP POST /propose with --port.
int main(int argc, char** argv) {
  CLI::App app{"Weight-free policy endpoint for integration tests"};
  std::string policy = "stub";
  bool sparse = false;
  int port = -1;
  std::string host = "127.0.0.1";
  app.add_option("--policy", policy, "stub, random, best or gp-mimic")->capture_default_str();
  app.add_flag("--sparse", sparse, "Send distributions as {codes, probs}");
  app.add_option("--port", port, "Serve HTTP on this port instead of stdio (0 = ephemeral)");
  app.add_option("--host", host, "HTTP bind address")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto p = gptopt::policy::make_mock_policy(policy);
    if (port < 0) {
      gptopt::policy::serve_jsonl(*p, std::cin, std::cout, sparse);
      return 0;
    }
    gptopt::policy::PolicyHttpServer server(p, host, port, sparse);
    std::cout << server.url() << std::endl;
    std::string line;
    while (std::getline(std::cin, line)) {
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
