#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gptopt/core/random.hpp"

namespace gptopt::functions {

enum class AugKind { input_warp, staircase, kink, plateau, ripple };

inline constexpr std::array<AugKind, 5> kAllAugKinds = {AugKind::input_warp, AugKind::staircase, AugKind::kink,
                                                        AugKind::plateau, AugKind::ripple};

inline std::string_view to_string(AugKind k) {
  switch (k) {
    case AugKind::input_warp: return "input_warp";
    case AugKind::staircase: return "staircase";
    case AugKind::kink: return "kink";
    case AugKind::plateau: return "plateau";
    case AugKind::ripple: return "ripple";
  }
  return "?";
}

/// x'_i = tanh(gain_i * u_i) / tanh(gain_i * reach_i), u = m x + b, reach_i = sum_j |m_ij| + |b_i|.
/// Maps [-1,1]^d smoothly into itself.
struct InputWarp {
  Eigen::MatrixXd m;
  Eigen::VectorXd b, gain, reach;
};

/// Sum of same-sign steep sigmoids along one axis.
struct Staircase {
  int axis = 0;
  std::vector<double> thresholds, heights;
  double steepness = 100.0;
};

/// Softplus hinges a_q * softplus(beta_q (w_q . x - t_q)) / beta_q plus an odd-power bend c (v . x)^p.
struct Kink {
  std::vector<Eigen::VectorXd> directions;
  std::vector<double> amplitudes, offsets, sharpness;
  Eigen::VectorXd bend_direction;
  double bend_amplitude = 0.0;
  int bend_power = 3;
};

/// Differentiable snapping of the value toward centroids (softmax-weighted).
struct Plateau {
  std::vector<double> centroids;
  double temperature = 1.0;
  double strength = 0.5;
};

/// a * sin(2 pi f0 (v . x) + depth * sin(2 pi fm (w . x)) + phase); |ripple| <= a.
struct Ripple {
  Eigen::VectorXd carrier_direction, mod_direction;
  double amplitude = 0.0, carrier_freq = 1.0, mod_depth = 0.0, mod_freq = 1.0, phase = 0.0;
};

struct AugmentationSpec {
  AugKind kind = AugKind::ripple;
  /// Base-function range the amplitudes were scaled by (1 for input warps).
  double scale = 1.0;
  std::variant<InputWarp, Staircase, Kink, Plateau, Ripple> params;
};

struct AugmentationConfig {
  /// Application probability per kind, indexed like kAllAugKinds.
  std::array<double, 5> probability{0.3, 0.3, 0.3, 0.3, 0.3};
  int range_probes = 256;
  double degenerate_range = 1e-12;

  static AugmentationConfig none() {
    AugmentationConfig c;
    c.probability.fill(0.0);
    return c;
  }

  static AugmentationConfig only(AugKind k) {
    AugmentationConfig c = none();
    c.probability[static_cast<std::size_t>(k)] = 1.0;
    return c;
  }
};

namespace detail {

inline Eigen::VectorXd random_unit(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  if (v.norm() < 1e-12) v(0) = 1.0;
  return v.normalized();
}

inline double dot(const Eigen::VectorXd& v, std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += v(i) * x[static_cast<std::size_t>(i)];
  return s;
}

inline double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

inline double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

}  // namespace detail

/// Draw the parameters of one augmentation. `range` is the probed base
/// range; `lo` its minimum (used to place plateau centroids).
inline AugmentationSpec sample_augmentation(AugKind kind, int dim, double lo, double range, Rng& rng) {
  AugmentationSpec s;
  s.kind = kind;
  s.scale = kind == AugKind::input_warp ? 1.0 : range;
  switch (kind) {
    case AugKind::input_warp: {
      InputWarp w;
      w.m = Eigen::MatrixXd::Identity(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) w.m(i, j) += 0.25 * rng.normal() / std::sqrt(static_cast<double>(dim));
      w.b.resize(dim);
      w.gain.resize(dim);
      w.reach.resize(dim);
      for (int i = 0; i < dim; ++i) {
        w.b(i) = rng.uniform(-0.2, 0.2);
        w.gain(i) = rng.uniform(0.5, 2.0);
        w.reach(i) = w.m.row(i).cwiseAbs().sum() + std::abs(w.b(i));
      }
      s.params = std::move(w);
      break;
    }
    case AugKind::staircase: {
      Staircase st;
      st.axis = rng.uniform_int(0, dim - 1);
      const int n = rng.uniform_int(1, 4);
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      for (int q = 0; q < n; ++q) {
        st.thresholds.push_back(rng.uniform(-0.8, 0.8));
        st.heights.push_back(sign * range * rng.uniform(0.05, 0.2));
      }
      std::sort(st.thresholds.begin(), st.thresholds.end());
      st.steepness = rng.uniform(50.0, 200.0);
      s.params = std::move(st);
      break;
    }
    case AugKind::kink: {
      Kink k;
      const int n = rng.uniform_int(1, 3);
      for (int q = 0; q < n; ++q) {
        k.directions.push_back(detail::random_unit(dim, rng));
        k.amplitudes.push_back(range * rng.uniform(-0.3, 0.3));
        k.offsets.push_back(rng.uniform(-0.5, 0.5));
        k.sharpness.push_back(rng.uniform(5.0, 20.0));
      }
      k.bend_direction = detail::random_unit(dim, rng);
      k.bend_amplitude = range * rng.uniform(-0.2, 0.2);
      k.bend_power = rng.bernoulli(0.5) ? 3 : 5;
      s.params = std::move(k);
      break;
    }
    case AugKind::plateau: {
      Plateau p;
      const int n = rng.uniform_int(3, 8);
      for (int q = 0; q < n; ++q) p.centroids.push_back(lo + range * (q + rng.uniform(0.25, 0.75)) / n);
      p.temperature = range * rng.uniform(0.02, 0.08);
      p.strength = rng.uniform(0.5, 0.9);
      s.params = std::move(p);
      break;
    }
    case AugKind::ripple: {
      Ripple r;
      r.carrier_direction = detail::random_unit(dim, rng);
      r.mod_direction = detail::random_unit(dim, rng);
      r.amplitude = range * rng.uniform(0.02, 0.1);
      r.carrier_freq = rng.uniform(2.0, 8.0);
      r.mod_depth = rng.uniform(0.5, 3.0);
      r.mod_freq = rng.uniform(0.5, 2.0);
      r.phase = rng.uniform(0.0, 6.283185307179586);
      s.params = std::move(r);
      break;
    }
  }
  return s;
}

inline void apply_input_warp(const InputWarp& w, std::span<const double> x, std::span<double> out) {
  const auto d = static_cast<int>(x.size());
  for (int i = 0; i < d; ++i) {
    double u = w.b(i);
    for (int j = 0; j < d; ++j) u += w.m(i, j) * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = std::tanh(w.gain(i) * u) / std::tanh(w.gain(i) * w.reach(i));
  }
}

/// Apply an output-side augmentation to value f at input x.
inline double apply_output_augmentation(const AugmentationSpec& s, std::span<const double> x, double f) {
  constexpr double kTwoPi = 6.283185307179586;
  switch (s.kind) {
    case AugKind::input_warp: return f;
    case AugKind::staircase: {
      const auto& st = std::get<Staircase>(s.params);
      const double t = x[static_cast<std::size_t>(st.axis)];
      for (std::size_t q = 0; q < st.thresholds.size(); ++q)
        f += st.heights[q] * detail::sigmoid(st.steepness * (t - st.thresholds[q]));
      return f;
    }
    case AugKind::kink: {
      const auto& k = std::get<Kink>(s.params);
      for (std::size_t q = 0; q < k.directions.size(); ++q)
        f += k.amplitudes[q] * detail::softplus(k.sharpness[q] * (detail::dot(k.directions[q], x) - k.offsets[q])) /
             k.sharpness[q];
      f += k.bend_amplitude * std::pow(detail::dot(k.bend_direction, x), k.bend_power);
      return f;
    }
    case AugKind::plateau: {
      const auto& p = std::get<Plateau>(s.params);
      double wmax = -1e300;
      std::vector<double> logits(p.centroids.size());
      for (std::size_t q = 0; q < p.centroids.size(); ++q) {
        const double d = (f - p.centroids[q]) / p.temperature;
        logits[q] = -0.5 * d * d;
        wmax = std::max(wmax, logits[q]);
      }
      double num = 0.0, den = 0.0;
      for (std::size_t q = 0; q < p.centroids.size(); ++q) {
        const double w = std::exp(logits[q] - wmax);
        num += w * p.centroids[q];
        den += w;
      }
      return f + p.strength * (num / den - f);
    }
    case AugKind::ripple: {
      const auto& r = std::get<Ripple>(s.params);
      const double mod = r.mod_depth * std::sin(kTwoPi * r.mod_freq * detail::dot(r.mod_direction, x));
      return f + r.amplitude * std::sin(kTwoPi * r.carrier_freq * detail::dot(r.carrier_direction, x) + mod + r.phase);
    }
  }
  return f;
}

}  // namespace gptopt::functions
