#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gptopt/core/errors.hpp"
#include "gptopt/core/trajectory.hpp"
#include "gptopt/dataset/discretize.hpp"

namespace gptopt::dataset {

inline constexpr int kRandomSteps = 10;

struct TokenizedStep {
  std::vector<int> action_codes;
  int objective_code = 0;
  bool is_new_best = false;

  bool operator==(const TokenizedStep&) const = default;
};

struct TokenizedPrompt {
  int dim = 0;
  int n_random = kRandomSteps;
  int n_opt = 0;
  std::vector<TokenizedStep> random_steps;
  std::vector<TokenizedStep> response_steps;
  /// Unterminated text after the last complete response step (empty if none).
  std::string incomplete_tail;

  bool incomplete() const { return !incomplete_tail.empty(); }

  /// The instruction sentence between the header and "Random Steps: ".
  std::string instruction_text() const {
    return "This problem is a synthetic " + std::to_string(dim) +
           "D black-box optimization problem. We will begin by initializing with " + std::to_string(n_random) +
           " random steps, after which you must optimize the objective with " + std::to_string(n_opt) +
           " additional steps. ";
  }

  bool operator==(const TokenizedPrompt&) const = default;
};

namespace grammar {
inline constexpr std::string_view kInstructionHeader = "### Instruction:\n";
inline constexpr std::string_view kRandomLabel = "Random Steps: ";
inline constexpr std::string_view kRandomEnd = ". \n";
inline constexpr std::string_view kResponseHeader = "### Response:\n";
inline constexpr std::string_view kResponseLabel = "Optimization Steps: ";
inline constexpr std::string_view kSeparator = "; ";
}  // namespace grammar

/// `Step {index}:[c0,c1,...]:{s},{True|False}`
inline void render_step(std::string& out, int index, const TokenizedStep& s) {
  out += "Step ";
  out += std::to_string(index);
  out += ":[";
  for (std::size_t i = 0; i < s.action_codes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s.action_codes[i]);
  }
  out += "]:";
  out += std::to_string(s.objective_code);
  out += s.is_new_best ? ",True" : ",False";
}

inline std::string render_step(int index, const TokenizedStep& s) {
  std::string out;
  render_step(out, index, s);
  return out;
}

/// Random steps are joined by "; " and closed by ". "; every response step is
/// followed by "; ". An incomplete tail is appended verbatim.
inline std::string render_prompt(const TokenizedPrompt& p) {
  std::string out;
  out.reserve(256 + 32 * (p.random_steps.size() + p.response_steps.size()));
  out += grammar::kInstructionHeader;
  out += p.instruction_text();
  out += grammar::kRandomLabel;
  for (std::size_t i = 0; i < p.random_steps.size(); ++i) {
    if (i) out += grammar::kSeparator;
    render_step(out, static_cast<int>(i) + 1, p.random_steps[i]);
  }
  out += grammar::kRandomEnd;
  out += grammar::kResponseHeader;
  out += grammar::kResponseLabel;
  for (std::size_t i = 0; i < p.response_steps.size(); ++i) {
    render_step(out, static_cast<int>(i) + 1, p.response_steps[i]);
    out += grammar::kSeparator;
  }
  out += p.incomplete_tail;
  return out;
}

/// Tokenize the first n_init + steps entries of `traj` with training-time
/// objective codes (normalized over that prefix). The prompt declares n_opt.
inline TokenizedPrompt tokenize_trajectory(const Trajectory& traj, int steps, int n_opt_declared) {
  if (traj.n_init != kRandomSteps) throw ConfigError("prompt grammar requires exactly 10 random steps");
  const auto count = static_cast<std::size_t>(traj.n_init + steps);
  if (steps < 0 || count > traj.values.size()) throw ConfigError("trajectory shorter than requested prompt prefix");
  const std::span<const double> vals(traj.values.data(), count);
  const auto codes = discretize_objectives_train(vals);
  const auto flags = new_best_flags(vals);
  TokenizedPrompt p;
  p.dim = traj.dim;
  p.n_random = traj.n_init;
  p.n_opt = n_opt_declared;
  for (std::size_t i = 0; i < count; ++i) {
    TokenizedStep s{discretize_actions(traj.points[i]), codes[i], flags[i]};
    (i < static_cast<std::size_t>(traj.n_init) ? p.random_steps : p.response_steps).push_back(std::move(s));
  }
  return p;
}

inline std::string render_prompt(const Trajectory& traj, int steps, int n_opt_declared) {
  return render_prompt(tokenize_trajectory(traj, steps, n_opt_declared));
}

namespace detail {

/// Thrown when input ends in the middle of an otherwise valid construct.
struct Truncated {
  std::size_t offset;
};

class Cursor {
 public:
  explicit Cursor(std::string_view text, std::size_t base = 0) : s_(text), base_(base) {}

  std::size_t pos() const { return pos_; }
  std::size_t offset() const { return base_ + pos_; }
  bool done() const { return pos_ >= s_.size(); }
  bool starts_with(std::string_view lit) const { return s_.substr(pos_).starts_with(lit); }

  void expect(std::string_view lit, std::string_view what) {
    const auto rest = s_.substr(pos_);
    if (rest.starts_with(lit)) {
      pos_ += lit.size();
      return;
    }
    if (lit.starts_with(rest)) throw Truncated{offset()};
    std::size_t i = 0;
    while (i < rest.size() && rest[i] == lit[i]) ++i;
    throw ParseError(offset() + i, "expected " + std::string(what));
  }

  int integer(std::string_view what, int max_value) {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9' && pos_ - start < 9) ++pos_;
    if (pos_ == start) {
      if (done()) throw Truncated{offset()};
      throw ParseError(offset(), "expected " + std::string(what));
    }
    int v = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (v > max_value)
      throw ParseError(base_ + start, std::string(what) + " " + std::to_string(v) + " exceeds " + std::to_string(max_value));
    return v;
  }

  bool boolean() {
    const auto rest = s_.substr(pos_);
    for (auto [lit, v] : {std::pair{std::string_view("True"), true}, std::pair{std::string_view("False"), false}}) {
      if (rest.starts_with(lit)) {
        pos_ += lit.size();
        return v;
      }
    }
    for (std::string_view lit : {"True", "False"})
      if (!rest.empty() && lit.starts_with(rest)) throw Truncated{offset()};
    if (rest.empty()) throw Truncated{offset()};
    throw ParseError(offset(), "expected True or False");
  }

 private:
  std::string_view s_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

inline TokenizedStep parse_step(Cursor& c, int expected_index, int dim) {
  c.expect("Step ", "'Step '");
  const std::size_t idx_at = c.offset();
  const int index = c.integer("step index", 1000000);
  if (c.done()) throw Truncated{c.offset()};
  if (expected_index > 0 && index != expected_index)
    throw ParseError(idx_at, "step index " + std::to_string(index) + " out of sequence, expected " +
                                 std::to_string(expected_index));
  c.expect(":[", "':['");
  TokenizedStep s;
  while (true) {
    s.action_codes.push_back(c.integer("action code", kMaxCode));
    if (c.starts_with(",")) {
      c.expect(",", "','");
      continue;
    }
    const std::size_t close_at = c.offset();
    c.expect("]:", "',' or ']:'");
    if (dim > 0 && static_cast<int>(s.action_codes.size()) != dim)
      throw ParseError(close_at, "step has " + std::to_string(s.action_codes.size()) + " coordinates, expected " +
                                     std::to_string(dim));
    break;
  }
  s.objective_code = c.integer("objective code", kMaxCode);
  if (c.done()) throw Truncated{c.offset()};
  c.expect(",", "','");
  s.is_new_best = c.boolean();
  return s;
}

}  // namespace detail

/// Parse a single complete step such as "Step 3:[12,999]:40,False".
/// `dim` <= 0 accepts any arity.
inline TokenizedStep parse_step(std::string_view text, int dim = 0, int expected_index = 0) {
  detail::Cursor c(text);
  try {
    auto s = detail::parse_step(c, expected_index, dim);
    if (!c.done()) throw ParseError(c.offset(), "trailing characters after step");
    return s;
  } catch (const detail::Truncated& t) {
    throw ParseError(t.offset, "incomplete step");
  }
}

/// Inverse of render_prompt. A trailing partial response step is kept in
/// incomplete_tail; any other deviation throws ParseError with a byte offset.
inline TokenizedPrompt parse_prompt(std::string_view text) {
  using namespace grammar;
  detail::Cursor c(text);
  TokenizedPrompt p;
  auto header = [&] {
    c.expect(kInstructionHeader, "'### Instruction:' header");
    c.expect("This problem is a synthetic ", "instruction sentence");
    p.dim = c.integer("dimension", 1000000);
    c.expect("D black-box optimization problem. We will begin by initializing with ", "instruction sentence");
    p.n_random = c.integer("random step count", 1000000);
    c.expect(" random steps, after which you must optimize the objective with ", "instruction sentence");
    p.n_opt = c.integer("optimization step count", 1000000);
    c.expect(" additional steps. ", "instruction sentence");
    c.expect(kRandomLabel, "'Random Steps: '");
    if (p.dim < 1) throw ParseError(0, "dimension must be positive");
    for (int i = 1; i <= p.n_random; ++i) {
      if (i > 1) c.expect(kSeparator, "'; ' between random steps");
      p.random_steps.push_back(detail::parse_step(c, i, p.dim));
    }
    c.expect(kRandomEnd, "'. ' and newline after random steps");
    c.expect(kResponseHeader, "'### Response:' header");
    c.expect(kResponseLabel, "'Optimization Steps: '");
  };
  try {
    header();
  } catch (const detail::Truncated& t) {
    throw ParseError(t.offset, "prompt ends before the response section");
  }
  while (!c.done()) {
    const std::size_t step_start = c.pos();
    try {
      auto step = detail::parse_step(c, static_cast<int>(p.response_steps.size()) + 1, p.dim);
      c.expect(kSeparator, "'; ' after response step");
      p.response_steps.push_back(std::move(step));
    } catch (const detail::Truncated&) {
      p.incomplete_tail = std::string(text.substr(step_start));
      break;
    }
  }
  return p;
}

}  // namespace gptopt::dataset
