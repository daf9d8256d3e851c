#pragma once

#include <span>
#include <string>

namespace gptopt::functions {

/// Deterministic base landscape of one family. Implementations are immutable
/// after construction and safe to evaluate concurrently.
class FunctionBody {
 public:
  virtual ~FunctionBody() = default;
  virtual int dim() const = 0;
  virtual double evaluate(std::span<const double> x) const = 0;
  virtual std::string describe() const = 0;
};

}  // namespace gptopt::functions
