#pragma once

#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/random.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

enum class ExprOp { var, poly, add, mul, sin, tanh };

/// Node of an expression tree stored in a flat arena.
///   var:  scale * u[var] + shift
///   poly: sum_k coeffs[k] * (scale * u[var] + shift)^k
///   add/mul: lhs (+|*) rhs
///   sin:  sin(scale * lhs + shift)
///   tanh: tanh(scale * lhs)
struct ExprNode {
  ExprOp op = ExprOp::var;
  int lhs = -1;
  int rhs = -1;
  int var = 0;
  double scale = 1.0;
  double shift = 0.0;
  std::vector<double> coeffs;
};

struct ExprFeature {
  int root = -1;
  double weight = 1.0;
};

struct ExprTreeParams {
  Eigen::MatrixXd rotation;      // u = rotation * x
  Eigen::VectorXd linear;        // unit-norm base term
  std::vector<ExprNode> nodes;   // arena
  std::vector<ExprFeature> features;
  bool output_warp = false;      // tanh(warp_gain * g)
  double warp_gain = 1.0;
  double output_scale = 1.0;

  static constexpr int kMaxPolyDegree = 4;

  /// Linear-only function f(x) = w . x.
  static ExprTreeParams linear_only(Eigen::VectorXd w) {
    ExprTreeParams p;
    p.rotation = Eigen::MatrixXd::Identity(w.size(), w.size());
    p.linear = std::move(w);
    return p;
  }

  static ExprTreeParams sample(int dim, Rng& rng, int max_depth = 0, int n_features = 0, int warp = -1) {
    ExprTreeParams p;
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    p.rotation = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
    p.linear.resize(dim);
    for (int i = 0; i < dim; ++i) p.linear(i) = rng.normal();
    if (p.linear.norm() < 1e-12) p.linear(0) = 1.0;
    p.linear.normalize();

    if (max_depth <= 0) max_depth = rng.uniform_int(2, 4);
    if (n_features <= 0) n_features = rng.uniform_int(1, 4);
    for (int f = 0; f < n_features; ++f) {
      const int root = p.grow(dim, 0, max_depth, rng);
      const double w = rng.uniform(0.2, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      p.features.push_back({root, w});
    }
    p.output_warp = warp < 0 ? rng.bernoulli(0.5) : warp == 1;
    p.warp_gain = rng.uniform(0.5, 2.0);
    p.output_scale = rng.log_uniform(0.5, 5.0);
    return p;
  }

  double eval_node(int idx, const Eigen::VectorXd& u) const {
    const ExprNode& n = nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case ExprOp::var: return n.scale * u(n.var) + n.shift;
      case ExprOp::poly: {
        const double t = n.scale * u(n.var) + n.shift;
        double acc = 0.0;
        for (auto it = n.coeffs.rbegin(); it != n.coeffs.rend(); ++it) acc = acc * t + *it;
        return acc;
      }
      case ExprOp::add: return eval_node(n.lhs, u) + eval_node(n.rhs, u);
      case ExprOp::mul: return eval_node(n.lhs, u) * eval_node(n.rhs, u);
      case ExprOp::sin: return std::sin(n.scale * eval_node(n.lhs, u) + n.shift);
      case ExprOp::tanh: return std::tanh(n.scale * eval_node(n.lhs, u));
    }
    return 0.0;
  }

  /// Operator skeleton without coefficients, e.g. "add(sin(x0),poly3(x1))".
  std::string structure(int idx) const {
    const ExprNode& n = nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case ExprOp::var: return "x" + std::to_string(n.var);
      case ExprOp::poly: return "poly" + std::to_string(n.coeffs.size() - 1) + "(x" + std::to_string(n.var) + ")";
      case ExprOp::add: return "add(" + structure(n.lhs) + "," + structure(n.rhs) + ")";
      case ExprOp::mul: return "mul(" + structure(n.lhs) + "," + structure(n.rhs) + ")";
      case ExprOp::sin: return "sin(" + structure(n.lhs) + ")";
      case ExprOp::tanh: return "tanh(" + structure(n.lhs) + ")";
    }
    return "?";
  }

  std::string formula(int idx) const {
    const ExprNode& n = nodes[static_cast<std::size_t>(idx)];
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4g", v);
      return std::string(buf);
    };
    const std::string lin = "(" + num(n.scale) + "*u" + std::to_string(n.var) + "+" + num(n.shift) + ")";
    switch (n.op) {
      case ExprOp::var: return lin;
      case ExprOp::poly: {
        std::string s = "[";
        for (std::size_t k = 0; k < n.coeffs.size(); ++k) {
          if (k) s += "+";
          s += num(n.coeffs[k]) + "*" + lin + "^" + std::to_string(k);
        }
        return s + "]";
      }
      case ExprOp::add: return "(" + formula(n.lhs) + " + " + formula(n.rhs) + ")";
      case ExprOp::mul: return "(" + formula(n.lhs) + " * " + formula(n.rhs) + ")";
      case ExprOp::sin: return "sin(" + num(n.scale) + "*" + formula(n.lhs) + "+" + num(n.shift) + ")";
      case ExprOp::tanh: return "tanh(" + num(n.scale) + "*" + formula(n.lhs) + ")";
    }
    return "?";
  }

 private:
  int grow(int dim, int depth, int max_depth, Rng& rng) {
    // poly is a leaf-level operator (polynomial feature of one projected input)
    const bool leaf = depth >= max_depth || (depth > 0 && rng.bernoulli(0.3));
    ExprNode n;
    if (leaf) {
      n.op = rng.bernoulli(0.5) ? ExprOp::var : ExprOp::poly;
    } else {
      n.op = static_cast<ExprOp>(rng.uniform_int(1, 5));
    }
    switch (n.op) {
      case ExprOp::var:
      case ExprOp::poly:
        n.var = rng.uniform_int(0, dim - 1);
        n.scale = rng.uniform(0.5, 2.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        n.shift = rng.uniform(-0.5, 0.5);
        if (n.op == ExprOp::poly) {
          const int degree = rng.uniform_int(2, kMaxPolyDegree);
          for (int k = 0; k <= degree; ++k) n.coeffs.push_back(rng.uniform(-1.0, 1.0));
        }
        break;
      case ExprOp::add:
      case ExprOp::mul:
        n.lhs = grow(dim, depth + 1, max_depth, rng);
        n.rhs = grow(dim, depth + 1, max_depth, rng);
        break;
      case ExprOp::sin:
        n.lhs = grow(dim, depth + 1, max_depth, rng);
        n.scale = rng.uniform(0.5, 3.0);
        n.shift = rng.uniform(0.0, 6.283185307179586);
        break;
      case ExprOp::tanh:
        n.lhs = grow(dim, depth + 1, max_depth, rng);
        n.scale = rng.uniform(0.5, 2.0);
        break;
    }
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }
};

class ExprTreeFunction final : public FunctionBody {
 public:
  ExprTreeFunction(int dim, ExprTreeParams params) : dim_(dim), p_(std::move(params)) {}

  int dim() const override { return dim_; }

  /// Value before output_scale is applied; lies in (-1,1) when output_warp is set.
  double evaluate_unscaled(std::span<const double> x) const {
    const Eigen::VectorXd u = p_.rotation * Eigen::Map<const Eigen::VectorXd>(x.data(), dim_);
    double g = p_.linear.dot(u);
    for (const auto& f : p_.features) g += f.weight * p_.eval_node(f.root, u);
    return p_.output_warp ? std::tanh(p_.warp_gain * g) : g;
  }

  double evaluate(std::span<const double> x) const override { return p_.output_scale * evaluate_unscaled(x); }

  std::string structure() const {
    std::string s = "linear";
    for (const auto& f : p_.features) s += " + " + p_.structure(f.root);
    return p_.output_warp ? "tanh(" + s + ")" : s;
  }

  std::string describe() const override {
    std::string s = "expr_tree: ";
    for (std::size_t i = 0; i < p_.features.size(); ++i) {
      if (i) s += " + ";
      s += p_.formula(p_.features[i].root);
    }
    return s;
  }

  const ExprTreeParams& params() const { return p_; }

 private:
  int dim_;
  ExprTreeParams p_;
};

/// family_params: {"max_depth": int, "n_features": int, "output_warp": bool}.
inline std::shared_ptr<const ExprTreeFunction> expr_tree_function(int dim, std::uint64_t seed,
                                                                   const json& overrides = json::object()) {
  check_param_keys(overrides, {"max_depth", "n_features", "output_warp"}, Family::expr_tree);
  const int max_depth = overrides.value("max_depth", 0);
  const int n_features = overrides.value("n_features", 0);
  const int warp = overrides.contains("output_warp") ? (overrides.at("output_warp").get<bool>() ? 1 : 0) : -1;
  Rng rng(derive_seed(seed, "expr_tree"));
  return std::make_shared<ExprTreeFunction>(dim, ExprTreeParams::sample(dim, rng, max_depth, n_features, warp));
}

}  // namespace gptopt::functions
