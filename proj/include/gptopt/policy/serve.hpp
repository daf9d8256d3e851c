#pragma once

#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/policy/endpoint.hpp"

namespace gptopt::policy {

/// Answer one JSON request per input line until EOF. Unparseable lines get an error reply.
inline void serve_jsonl(const Policy& policy, std::istream& in, std::ostream& out, bool sparse = false) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json reply;
    try {
      reply = handle_request(policy, json::parse(line), sparse);
    } catch (const json::exception& e) {
      reply = json{{"error", {{"code", "bad_json"}, {"message", e.what()}}}};
    }
    out << reply.dump() << '\n' << std::flush;
  }
}

/// POST /propose server on a background thread, stopped on destruction.
/// Port 0 binds an ephemeral port.
class PolicyHttpServer {
 public:
  PolicyHttpServer(std::shared_ptr<const Policy> policy, const std::string& host = "127.0.0.1", int port = 0,
                   bool sparse = false)
      : policy_(std::move(policy)) {
    server_.Post("/propose", [this, sparse](const httplib::Request& req, httplib::Response& res) {
      json reply;
      try {
        reply = handle_request(*policy_, json::parse(req.body), sparse);
      } catch (const json::exception& e) {
        reply = json{{"error", {{"code", "bad_json"}, {"message", e.what()}}}};
      }
      res.status = reply.contains("error") ? 400 : 200;
      res.set_content(reply.dump(), "application/json");
    });
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) throw InferenceError("cannot bind policy server on " + host);
    host_ = host;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  PolicyHttpServer(const PolicyHttpServer&) = delete;
  PolicyHttpServer& operator=(const PolicyHttpServer&) = delete;

  ~PolicyHttpServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string url() const { return "http://" + host_ + ":" + std::to_string(port_) + "/propose"; }

 private:
  std::shared_ptr<const Policy> policy_;
  httplib::Server server_;
  std::string host_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace gptopt::policy
