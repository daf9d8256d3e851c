#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/random.hpp"

namespace gptopt::functions {

using json = nlohmann::json;

enum class Family { gp, nn, ode, expr_tree, fourier };

inline constexpr std::array<Family, 5> kAllFamilies = {Family::gp, Family::nn, Family::ode, Family::expr_tree,
                                                       Family::fourier};

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 10;

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::gp: return "gp";
    case Family::nn: return "nn";
    case Family::ode: return "ode";
    case Family::expr_tree: return "expr_tree";
    case Family::fourier: return "fourier";
  }
  return "?";
}

inline Family family_from_string(std::string_view s) {
  for (auto f : kAllFamilies)
    if (to_string(f) == s) return f;
  throw ConfigError("unsupported function family '" + std::string(s) + "'");
}

/// Identity of a synthetic function. Two equal specs build functions that
/// agree bit-for-bit on every input.
struct FunctionSpec {
  Family family = Family::gp;
  int dim = 2;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> augment_seed;
  /// Family-specific overrides of the seeded draws; empty means "all drawn".
  json family_params = json::object();

  /// Stable identifier, e.g. "fourier-d3-s42" or "gp-d2-s7-a9".
  std::string id() const {
    std::string s = std::string(to_string(family)) + "-d" + std::to_string(dim) + "-s" + std::to_string(seed);
    if (augment_seed) s += "-a" + std::to_string(*augment_seed);
    if (!family_params.empty()) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "-p%08x", static_cast<unsigned>(fnv1a64(family_params.dump()) & 0xffffffffu));
      s += buf;
    }
    return s;
  }

  void validate() const {
    if (dim < kMinDim || dim > kMaxDim)
      throw ConfigError("dim " + std::to_string(dim) + " out of range [2,10]");
    if (!family_params.is_object()) throw ConfigError("family_params must be a JSON object");
  }

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

inline void to_json(json& j, const FunctionSpec& s) {
  j = json{{"family", std::string(to_string(s.family))},
           {"dim", s.dim},
           {"seed", s.seed},
           {"augment_seed", s.augment_seed ? json(*s.augment_seed) : json(nullptr)},
           {"family_params", s.family_params}};
}

inline void from_json(const json& j, FunctionSpec& s) {
  try {
    s.family = family_from_string(j.at("family").get<std::string>());
    s.dim = j.at("dim").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.augment_seed.reset();
    if (j.contains("augment_seed") && !j.at("augment_seed").is_null())
      s.augment_seed = j.at("augment_seed").get<std::uint64_t>();
    s.family_params = j.value("family_params", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed function spec: ") + e.what());
  }
}

/// Throws ConfigError naming any key of `params` not in `allowed`.
inline void check_param_keys(const json& params, std::initializer_list<std::string_view> allowed, Family family) {
  for (auto it = params.begin(); it != params.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok)
      throw ConfigError("unknown family_params key '" + it.key() + "' for family " + std::string(to_string(family)));
  }
}

}  // namespace gptopt::functions
