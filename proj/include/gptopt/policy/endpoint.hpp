#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/policy/codes.hpp"

namespace gptopt::policy {

using json = nlohmann::json;

/// Wire request: {"prompt", "dim", "k", "temperature"} plus an optional "seed".
struct ProposeRequest {
  std::string prompt;
  int dim = 0;
  int k = 4;
  double temperature = 1.5;
  std::optional<std::uint64_t> seed;
};

inline void to_json(json& j, const ProposeRequest& r) {
  j = json{{"prompt", r.prompt}, {"dim", r.dim}, {"k", r.k}, {"temperature", r.temperature}};
  if (r.seed) j["seed"] = *r.seed;
}

inline void from_json(const json& j, ProposeRequest& r) {
  r.prompt = j.at("prompt").get<std::string>();
  r.dim = j.at("dim").get<int>();
  r.k = j.at("k").get<int>();
  r.temperature = j.at("temperature").get<double>();
  r.seed.reset();
  if (j.contains("seed") && !j["seed"].is_null()) r.seed = j["seed"].get<std::uint64_t>();
}

/// Dense form: {"action_codes": [...], "objective_dist": [1000 numbers]}.
inline json proposal_to_json(const PolicyProposal& p) {
  return json{{"action_codes", p.action_codes}, {"objective_dist", p.objective_dist}};
}

/// Sparse form: objective_dist as {"codes": [...], "probs": [...]} over nonzero bins.
inline json proposal_to_sparse_json(const PolicyProposal& p) {
  std::vector<int> codes;
  std::vector<double> probs;
  for (std::size_t s = 0; s < p.objective_dist.size(); ++s)
    if (p.objective_dist[s] > 0.0) {
      codes.push_back(static_cast<int>(s));
      probs.push_back(p.objective_dist[s]);
    }
  return json{{"action_codes", p.action_codes}, {"objective_dist", json{{"codes", codes}, {"probs", probs}}}};
}

inline json proposals_response(const std::vector<PolicyProposal>& ps, bool sparse = false) {
  json arr = json::array();
  for (const auto& p : ps) arr.push_back(sparse ? proposal_to_sparse_json(p) : proposal_to_json(p));
  return json{{"proposals", arr}};
}

/// Parse and validate one wire proposal for a d-dimensional problem.
/// Throws InferenceError describing the first violation.
inline PolicyProposal parse_proposal(const json& j, int dim) {
  if (!j.is_object()) throw InferenceError("proposal is not an object");
  if (!j.contains("action_codes") || !j["action_codes"].is_array()) throw InferenceError("proposal lacks action_codes");
  PolicyProposal p;
  for (const auto& c : j["action_codes"]) {
    if (!c.is_number_integer()) throw InferenceError("action code is not an integer");
    const auto v = c.get<std::int64_t>();
    if (v < 0 || v > dataset::kMaxCode) throw InferenceError("action code " + std::to_string(v) + " out of range");
    p.action_codes.push_back(static_cast<int>(v));
  }
  if (static_cast<int>(p.action_codes.size()) != dim)
    throw InferenceError("proposal has " + std::to_string(p.action_codes.size()) + " action codes, expected " +
                         std::to_string(dim));
  if (!j.contains("objective_dist")) throw InferenceError("proposal lacks objective_dist");
  const auto& d = j["objective_dist"];
  try {
    if (d.is_object()) {
      p.objective_dist = expand_sparse(d.at("codes").get<std::vector<int>>(), d.at("probs").get<std::vector<double>>());
    } else {
      p.objective_dist = d.get<std::vector<double>>();
      if (auto err = check_dist(p.objective_dist); !err.empty()) throw InferenceError(err);
    }
  } catch (const json::exception& e) {
    throw InferenceError(std::string("malformed objective_dist: ") + e.what());
  }
  return p;
}

struct ProposeResult {
  std::vector<PolicyProposal> proposals;
  /// One message per dropped proposal.
  std::vector<std::string> diagnostics;
};

/// Validate a propose response. Malformed proposals are dropped with a
/// diagnostic; zero valid proposals is an InferenceError.
inline ProposeResult parse_propose_response(const json& response, int dim) {
  if (response.contains("error")) throw InferenceError("policy endpoint error: " + response["error"].dump());
  if (!response.contains("proposals") || !response["proposals"].is_array())
    throw InferenceError("response lacks a proposals array");
  ProposeResult r;
  std::size_t i = 0;
  for (const auto& pj : response["proposals"]) {
    try {
      r.proposals.push_back(parse_proposal(pj, dim));
    } catch (const InferenceError& e) {
      r.diagnostics.push_back("proposal " + std::to_string(i) + " dropped: " + e.what());
    }
    ++i;
  }
  if (r.proposals.empty()) throw InferenceError("no valid proposals in response");
  return r;
}

/// Something that answers propose requests with a JSON response.
class PolicyEndpoint {
 public:
  virtual ~PolicyEndpoint() = default;
  virtual json call(const json& request) = 0;
  virtual std::string name() const = 0;
};

inline ProposeResult propose(PolicyEndpoint& endpoint, const ProposeRequest& request) {
  return parse_propose_response(endpoint.call(json(request)), request.dim);
}

/// A policy implemented in this process. Implementations must be safe to call concurrently.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<PolicyProposal> propose(const ProposeRequest& request) const = 0;
  virtual std::string name() const = 0;
};

/// Answer a raw request with `policy`; malformed requests produce {"error": ...}.
inline json handle_request(const Policy& policy, const json& request, bool sparse = false) {
  ProposeRequest r;
  try {
    r = request.get<ProposeRequest>();
  } catch (const json::exception& e) {
    return json{{"error", {{"code", "bad_request"}, {"message", e.what()}}}};
  }
  if (r.dim < 1 || r.k < 1)
    return json{{"error", {{"code", "bad_request"}, {"message", "dim and k must be positive"}}}};
  try {
    return proposals_response(policy.propose(r), sparse);
  } catch (const std::exception& e) {
    return json{{"error", {{"code", "policy_failure"}, {"message", e.what()}}}};
  }
}

/// Routes requests through the JSON schema to an in-process policy.
class InProcessEndpoint final : public PolicyEndpoint {
 public:
  explicit InProcessEndpoint(std::shared_ptr<const Policy> policy) : policy_(std::move(policy)) {}
  json call(const json& request) override { return handle_request(*policy_, request); }
  std::string name() const override { return "mock:" + policy_->name(); }

 private:
  std::shared_ptr<const Policy> policy_;
};

/// Newline-delimited JSON over a child process's stdin/stdout. The child is
/// started with /bin/sh -c and killed on destruction. Calls are serialized.
class SubprocessEndpoint final : public PolicyEndpoint {
 public:
  SubprocessEndpoint(std::string command, double timeout_seconds) : command_(std::move(command)), timeout_(timeout_seconds) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw InferenceError("pipe failed: " + std::string(std::strerror(errno)));
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw InferenceError("pipe failed: " + std::string(std::strerror(errno)));
    }
    pid_ = ::fork();
    if (pid_ < 0) throw InferenceError("fork failed: " + std::string(std::strerror(errno)));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      const std::string script = "exec " + command_;
      ::execl("/bin/sh", "sh", "-c", script.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
  }

  SubprocessEndpoint(const SubprocessEndpoint&) = delete;
  SubprocessEndpoint& operator=(const SubprocessEndpoint&) = delete;

  ~SubprocessEndpoint() override {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  json call(const json& request) override {
    std::lock_guard lock(mu_);
    const std::string line = request.dump() + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
      const auto n = ::write(in_fd_, line.data() + off, line.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw InferenceError("policy process '" + command_ + "' closed its input");
      }
      off += static_cast<std::size_t>(n);
    }
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_);
    while (true) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string reply = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        try {
          return json::parse(reply);
        } catch (const json::exception& e) {
          throw InferenceError("policy process sent invalid JSON: " + std::string(e.what()));
        }
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw InferenceError("policy process timed out after " + std::to_string(timeout_) + " s");
      pollfd p{out_fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw InferenceError("poll failed: " + std::string(std::strerror(errno)));
      if (rc == 0) continue;
      char buf[65536];
      const auto n = ::read(out_fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw InferenceError("policy process '" + command_ + "' exited");
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

  std::string name() const override { return "subprocess:" + command_; }

 private:
  std::string command_;
  double timeout_;
  pid_t pid_ = -1;
  int in_fd_ = -1, out_fd_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

/// HTTP POST of the request body to http://host:port/path (default /propose).
class HttpEndpoint final : public PolicyEndpoint {
 public:
  HttpEndpoint(const std::string& url, double timeout_seconds) : url_(url), timeout_(timeout_seconds) {
    constexpr std::string_view scheme = "http://";
    if (!url.starts_with(scheme)) throw ConfigError("endpoint url must start with http://: " + url);
    std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    path_ = slash == std::string::npos ? "/propose" : rest.substr(slash);
    const std::string hostport = rest.substr(0, slash);
    const auto colon = hostport.rfind(':');
    host_ = colon == std::string::npos ? hostport : hostport.substr(0, colon);
    port_ = 80;
    if (colon != std::string::npos) {
      try {
        port_ = std::stoi(hostport.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad port in endpoint url " + url);
      }
    }
    if (host_.empty()) throw ConfigError("missing host in endpoint url " + url);
  }

  json call(const json& request) override {
    httplib::Client cli(host_, port_);
    const auto secs = std::chrono::duration<double>(timeout_);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    auto res = cli.Post(path_, request.dump(), "application/json");
    if (!res) throw InferenceError("HTTP request to " + url_ + " failed: " + httplib::to_string(res.error()));
    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::exception& e) {
      throw InferenceError("HTTP " + std::to_string(res->status) + " from " + url_ + " with invalid JSON");
    }
    if (res->status != 200 && !body.contains("error"))
      throw InferenceError("HTTP " + std::to_string(res->status) + " from " + url_);
    return body;
  }

  std::string name() const override { return url_; }

 private:
  std::string url_, host_, path_;
  int port_ = 80;
  double timeout_;
};

}  // namespace gptopt::policy
