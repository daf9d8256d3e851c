#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/random.hpp"
#include "gptopt/functions/body.hpp"
#include "gptopt/functions/spec.hpp"

namespace gptopt::functions {

enum class Activation { relu, tanh, leaky_relu };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "?";
}

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::relu;
};

struct NeuralNetParams {
  std::vector<DenseLayer> hidden;
  Eigen::RowVectorXd out_weights;
  double out_bias = 0.0;

  static constexpr int kMinLayers = 5;
  static constexpr int kMaxLayers = 10;
  static constexpr int kMinWidth = 16;
  static constexpr int kMaxWidth = 256;

  // He-style init: N(0, 2/fan_in) weights, U[-0.5,0.5] biases.
  static NeuralNetParams sample(int dim, Rng& rng, int n_layers = 0, int width = 0) {
    if (n_layers <= 0) n_layers = rng.uniform_int(kMinLayers, kMaxLayers);
    NeuralNetParams p;
    int fan_in = dim;
    for (int l = 0; l < n_layers; ++l) {
      const int w = width > 0 ? width : rng.uniform_int(kMinWidth, kMaxWidth);
      DenseLayer layer;
      layer.activation = static_cast<Activation>(rng.uniform_int(0, 2));
      layer.weights.resize(w, fan_in);
      const double sd = std::sqrt(2.0 / fan_in);
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < fan_in; ++j) layer.weights(i, j) = rng.normal(0.0, sd);
      layer.bias.resize(w);
      for (int i = 0; i < w; ++i) layer.bias(i) = rng.uniform(-0.5, 0.5);
      p.hidden.push_back(std::move(layer));
      fan_in = w;
    }
    p.out_weights.resize(fan_in);
    const double sd = std::sqrt(1.0 / fan_in);
    for (int j = 0; j < fan_in; ++j) p.out_weights(j) = rng.normal(0.0, sd);
    p.out_bias = rng.uniform(-0.5, 0.5);
    return p;
  }
};

class NeuralNetFunction final : public FunctionBody {
 public:
  NeuralNetFunction(int dim, NeuralNetParams params) : dim_(dim), params_(std::move(params)) {}

  int dim() const override { return dim_; }

  double evaluate(std::span<const double> x) const override {
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(x.data(), dim_);
    for (const auto& layer : params_.hidden) {
      Eigen::VectorXd z = layer.weights * h + layer.bias;
      switch (layer.activation) {
        case Activation::relu: h = z.cwiseMax(0.0); break;
        case Activation::tanh: h = z.array().tanh().matrix(); break;
        case Activation::leaky_relu: h = z.unaryExpr([](double v) { return v > 0.0 ? v : 0.01 * v; }); break;
      }
    }
    return params_.out_weights.dot(h) + params_.out_bias;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "nn(" << dim_;
    for (const auto& l : params_.hidden) os << "-" << l.weights.rows() << to_string(l.activation).substr(0, 1);
    os << "-1)";
    return os.str();
  }

  int hidden_layers() const { return static_cast<int>(params_.hidden.size()); }
  const NeuralNetParams& params() const { return params_; }

 private:
  int dim_;
  NeuralNetParams params_;
};

/// family_params: {"n_layers": int, "width": int}.
inline std::shared_ptr<const NeuralNetFunction> nn_function(int dim, std::uint64_t seed,
                                                             const json& overrides = json::object()) {
  check_param_keys(overrides, {"n_layers", "width"}, Family::nn);
  const int n_layers = overrides.value("n_layers", 0);
  const int width = overrides.value("width", 0);
  if (overrides.contains("n_layers") && n_layers < 1) throw ConfigError("nn n_layers must be >= 1");
  if (overrides.contains("width") && width < 1) throw ConfigError("nn width must be >= 1");
  Rng rng(derive_seed(seed, "nn"));
  return std::make_shared<NeuralNetFunction>(dim, NeuralNetParams::sample(dim, rng, n_layers, width));
}

}  // namespace gptopt::functions
