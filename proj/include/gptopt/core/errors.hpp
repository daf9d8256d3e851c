#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gptopt {

// Invalid user-supplied configuration (bad family, dim out of range, unknown key).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A generator could not produce a valid function (e.g. non-PD covariance after retries).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// GP fit failed even after jitter escalation.
class SurrogateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside [-1,1]^d where the domain is enforced.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Policy endpoint failure: transport, timeout or zero valid proposals.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace gptopt
