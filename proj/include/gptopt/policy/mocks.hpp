#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gptopt/bo/acquisition.hpp"
#include "gptopt/bo/gp.hpp"
#include "gptopt/core/normal.hpp"
#include "gptopt/core/random.hpp"
#include "gptopt/dataset/discretize.hpp"
#include "gptopt/dataset/prompt.hpp"
#include "gptopt/policy/codes.hpp"
#include "gptopt/policy/endpoint.hpp"

namespace gptopt::policy {

inline Rng request_rng(const ProposeRequest& r, std::string_view tag) {
  return Rng(derive_seed(r.seed.value_or(0), {fnv1a64(tag), fnv1a64(r.prompt)}));
}

/// Uniform action codes with a uniform objective distribution.
class RandomPolicy final : public Policy {
 public:
  std::vector<PolicyProposal> propose(const ProposeRequest& r) const override {
    Rng rng = request_rng(r, "random-policy");
    std::vector<PolicyProposal> out;
    for (int i = 0; i < r.k; ++i) {
      PolicyProposal p;
      for (int j = 0; j < r.dim; ++j) p.action_codes.push_back(rng.uniform_int(0, dataset::kMaxCode));
      p.objective_dist = uniform_dist();
      out.push_back(std::move(p));
    }
    return out;
  }
  std::string name() const override { return "random"; }
};

/// Re-proposes the lowest-coded step in the prompt (earliest on ties) with a point mass at its code.
class BestPointPolicy final : public Policy {
 public:
  std::vector<PolicyProposal> propose(const ProposeRequest& r) const override {
    const auto p = dataset::parse_prompt(r.prompt);
    const dataset::TokenizedStep* best = nullptr;
    for (const auto* steps : {&p.random_steps, &p.response_steps})
      for (const auto& s : *steps)
        if (!best || s.objective_code < best->objective_code) best = &s;
    if (!best) throw InferenceError("prompt has no steps");
    return std::vector<PolicyProposal>(static_cast<std::size_t>(r.k),
                                       PolicyProposal{best->action_codes, point_mass(best->objective_code)});
  }
  std::string name() const override { return "best"; }
};

/// Fixed reply: every coordinate at code 500 and a point mass at objective code 400.
class StubPolicy final : public Policy {
 public:
  std::vector<PolicyProposal> propose(const ProposeRequest& r) const override {
    return std::vector<PolicyProposal>(static_cast<std::size_t>(r.k),
                                       PolicyProposal{std::vector<int>(static_cast<std::size_t>(r.dim), 500), point_mass(400)});
  }
  std::string name() const override { return "stub"; }
};

/// Discretize N(mu, sd^2) onto the 1000 codes; the end bins absorb the tails.
inline ObjectiveDist gaussian_code_dist(double mu, double sd) {
  ObjectiveDist d(kNumCodes, 0.0);
  double prev = 0.0;
  for (int s = 0; s < kNumCodes; ++s) {
    const double upper = s == kNumCodes - 1 ? 1.0 : normal::cdf((s + 0.5 - mu) / sd);
    d[static_cast<std::size_t>(s)] = std::max(0.0, upper - prev);
    prev = std::max(prev, upper);
  }
  double sum = 0.0;
  for (double p : d) sum += p;
  for (double& p : d) p /= sum;
  return d;
}

struct GpMimicOptions {
  /// Perturbation sd (unit-domain units) for proposals after the first.
  double jitter = 0.02;
  /// Floor on the predictive sd in code units.
  double min_sd = 0.5;
  bo::AcqMaximizerOptions acq;
};

/// Stands in for a trained policy: fits the surrogate to the (bin-center,
/// code) history in the prompt and proposes the LogEI maximizer. Proposal 0 is
/// the maximizer itself; the others are jittered copies. Each carries the
/// discretized GP predictive distribution. Falls back to uniform proposals
/// when the prompt cannot be fitted.
class GpMimicPolicy final : public Policy {
 public:
  explicit GpMimicPolicy(GpMimicOptions opt = {}) : opt_(std::move(opt)) {}

  std::vector<PolicyProposal> propose(const ProposeRequest& r) const override {
    Rng rng = request_rng(r, "gp-mimic");
    try {
      const auto p = dataset::parse_prompt(r.prompt);
      std::vector<Point> xs;
      std::vector<double> ys;
      for (const auto* steps : {&p.random_steps, &p.response_steps})
        for (const auto& s : *steps) {
          xs.push_back(dataset::decode_actions(s.action_codes));
          ys.push_back(s.objective_code);
        }
      bo::GpFitOptions fit;
      fit.seed = rng.next_u64();
      const auto model = bo::fit_gp(xs, ys, fit);
      const double incumbent = *std::min_element(ys.begin(), ys.end());
      const auto best = bo::maximize_acquisition(model, bo::AcquisitionConfig::logei(0.0), incumbent, rng.next_u64(), opt_.acq);
      std::vector<PolicyProposal> out;
      for (int i = 0; i < r.k; ++i) {
        Point x = best.x;
        if (i > 0)
          for (double& c : x) c = std::clamp(c + opt_.jitter * rng.normal(), -1.0, 1.0);
        PolicyProposal prop;
        prop.action_codes = dataset::discretize_actions(x);
        const auto [mu, sd] = model.posterior(dataset::decode_actions(prop.action_codes));
        prop.objective_dist = gaussian_code_dist(mu, std::max(sd, opt_.min_sd));
        out.push_back(std::move(prop));
      }
      return out;
    } catch (const std::exception&) {
      return RandomPolicy().propose(r);
    }
  }

  std::string name() const override { return "gp-mimic"; }

 private:
  GpMimicOptions opt_;
};

inline std::shared_ptr<const Policy> make_mock_policy(const std::string& name) {
  if (name == "random") return std::make_shared<RandomPolicy>();
  if (name == "best") return std::make_shared<BestPointPolicy>();
  if (name == "stub") return std::make_shared<StubPolicy>();
  if (name == "gp-mimic") return std::make_shared<GpMimicPolicy>();
  throw ConfigError("unknown mock policy '" + name + "' (expected random, best, stub or gp-mimic)");
}

/// "mock:<name>", "subprocess:<command>" or "http://host:port[/path]".
inline std::unique_ptr<PolicyEndpoint> make_endpoint(const std::string& spec, double timeout_seconds = 60.0) {
  if (spec.starts_with("mock:")) return std::make_unique<InProcessEndpoint>(make_mock_policy(spec.substr(5)));
  if (spec.starts_with("subprocess:")) {
    const auto cmd = spec.substr(11);
    if (cmd.empty()) throw ConfigError("subprocess endpoint needs a command");
    return std::make_unique<SubprocessEndpoint>(cmd, timeout_seconds);
  }
  if (spec.starts_with("http://")) return std::make_unique<HttpEndpoint>(spec, timeout_seconds);
  throw ConfigError("unknown endpoint '" + spec + "' (expected mock:NAME, subprocess:CMD or http://HOST:PORT)");
}

}  // namespace gptopt::policy
