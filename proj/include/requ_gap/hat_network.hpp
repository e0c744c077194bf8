#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/bump.hpp"
#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/network.hpp"
#include "requ_gap/wide_real.hpp"

namespace requ_gap {

struct HatBuildParams {
  std::uint64_t n = 1;
  int L = 5;
  double C = 1.0;
  BumpSpec spec;
  GrowthPolicy policy = GrowthPolicy::constant(5, 1.0);
};

/// Structural nonzero counts of the building blocks, in build order.
struct HatInventory {
  std::size_t A1 = 0, b1 = 0, A2 = 0, b2 = 0, A3 = 0, b3 = 0;
  std::size_t D = 0;      // D1 (L = 5) or D2 (L >= 6)
  std::size_t alpha = 0;  // bias of the D2 layer, 0 when L = 5
  std::size_t A = 0;      // per repeated (A, alpha) layer
  std::size_t repeats = 0;
  std::size_t K = 0, E = 0;
};

/// Largest n^8 d for which the middle layers are materialized.
inline constexpr std::uint64_t kMaxHatBlocks = std::uint64_t{1} << 21;

struct HatNetwork {
  NeuralNetwork net;
  HatBuildParams params;
  double amplitude = 0.0;  // C^(2^L-1) n^((2^L-1)/2) / (4 M^8); may be +inf
  double amplitude_log2 = 0.0;
  HatInventory inventory;
  long precision_bits = 0;

  /// The last layers cancel two values of size ~ C^(2^L) n^(2^(L-1)); they are
  /// evaluated in wide precision.
  static constexpr std::size_t first_wide_layer = 3;

  [[nodiscard]] double evaluate(std::span<const double> x) const {
    return realize_mixed(net, x, first_wide_layer, precision_bits).front();
  }
  /// Budget 16 n^8 d + 7 L
  [[nodiscard]] double weight_budget() const {
    return 16.0 * std::pow(static_cast<double>(params.n), 8) * static_cast<double>(params.spec.d) + 7.0 * params.L;
  }
};

/// Largest C >= 1 with C^8 <= c(n).
inline double choose_C(double c_n) {
  require(c_n >= 1.0, "c(n) >= 1", "no C with 1 <= C and C^8 <= c(n)");
  if (std::isinf(c_n)) return std::numeric_limits<double>::max();
  double C = std::pow(c_n, 0.125);
  while (C > 1.0 && ipow(C, 8) > c_n) C = std::nextafter(C, 0.0);
  return std::max(C, 1.0);
}

inline double hat_amplitude_log2(std::uint64_t n, int L, double C, double M) {
  const double e = std::ldexp(1.0, L) - 1.0;
  return e * (std::log2(C) + 0.5 * std::log2(static_cast<double>(n))) - 2.0 - 8.0 * std::log2(M);
}

inline void validate_hat_params(const HatBuildParams& p) {
  p.spec.validate();
  require(p.spec.p == 2, "p == 2", "hat networks are built for p = 2");
  require(p.n >= 1, "n >= 1", "n must be positive");
  require(p.L >= 5, "L >= 5", "hat network depth L must be at least 5, got " + std::to_string(p.L));
  require(p.L <= p.policy.depth(p.n), "L <= l(n)",
          "depth L = " + std::to_string(p.L) + " exceeds l(n) = " + std::to_string(p.policy.depth(p.n)));
  require(p.spec.M >= 1.0, "M >= 1", "hat network width parameter M must be >= 1");
  require(p.C >= 1.0 && std::isfinite(p.C), "C >= 1", "amplitude base C must be finite and >= 1");
  require(ipow(p.C, 8) <= p.policy.coef(p.n), "C^8 <= c(n)", "C^8 exceeds the coefficient bound c(n)");
  for (double v : p.spec.y) require(v >= 0.0 && v <= 1.0, "y in [0,1]^d", "hat centre must lie in [0,1]^d");
  const double blocks = std::pow(static_cast<double>(p.n), 8) * static_cast<double>(p.spec.d);
  require(blocks <= static_cast<double>(kMaxHatBlocks), "n^8 d <= 2^21",
          "n^8 d is too large to materialize the middle layers");
}

/// ReQU network of depth L realizing amplitude * vartheta_{M,y}.
inline HatNetwork build_hat_network(const HatBuildParams& p) {
  validate_hat_params(p);
  const std::size_t d = p.spec.d;
  const std::size_t n = p.n;
  std::size_t n8 = 1;
  for (int k = 0; k < 8; ++k) n8 *= n;
  const double M = p.spec.M;
  const double C = p.C;
  const double zeta = std::sqrt(static_cast<double>(d - 1) / static_cast<double>(d));
  const double C8 = ipow(C, 8);
  const double inv_Csqrtn = 1.0 / (C * std::sqrt(static_cast<double>(n)));

  HatInventory inv;
  std::vector<Layer> layers;

  // A1, b1: 2n copies of (x_j - y_j, y_j - x_j) per coordinate
  {
    std::vector<MatrixEntry> e;
    std::vector<double> b(2 * n * d);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t r = j * 2 * n + 2 * k;
        e.push_back({r, j, 1.0});
        e.push_back({r + 1, j, -1.0});
        b[r] = -p.spec.y[j];
        b[r + 1] = p.spec.y[j];
      }
    }
    layers.push_back({SparseMatrix(2 * n * d, d, std::move(e)), std::move(b)});
  }
  // A2, b2: n^8 triples per coordinate
  const std::size_t triples = n8 * d;
  {
    std::vector<MatrixEntry> e;
    e.reserve(2 * triples);
    std::vector<double> b(3 * triples);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t t = 0; t < n8; ++t) {
        const std::size_t r = 3 * (j * n8 + t);
        const std::size_t c = j * 2 * n + 2 * (t % n);
        e.push_back({r, c, -1.0});
        e.push_back({r, c + 1, -1.0});
        b[r] = 1.0 / (M * M);
        b[r + 1] = zeta / (M * M);
        b[r + 2] = C8 / std::sqrt(static_cast<double>(d));
      }
    }
    layers.push_back({SparseMatrix(3 * triples, 2 * n * d, std::move(e)), std::move(b)});
  }
  // A3, b3
  {
    const double w = 1.0 / static_cast<double>(n8);
    std::vector<MatrixEntry> e;
    e.reserve(7 * triples);
    for (std::size_t t = 0; t < triples; ++t) {
      for (std::size_t r = 0; r < 3; ++r) {
        e.push_back({r, 3 * t, w});
        e.push_back({r, 3 * t + 1, -w});
      }
      e.push_back({3, 3 * t + 2, 1.0});
    }
    const double M4 = ipow(M, 4);
    layers.push_back({SparseMatrix(4, 3 * triples, std::move(e)), {0.0, -0.5 / M4, -1.0 / M4, 0.0}});
  }

  const SparseMatrix E(1, 2, {{0, 0, 0.25}, {0, 1, -0.25}});
  if (p.L == 5) {
    const double s = inv_Csqrtn;
    layers.push_back({SparseMatrix(2, 4,
                                   {{0, 0, 0.5}, {0, 1, -1.0}, {0, 2, 0.5}, {0, 3, s},
                                    {1, 0, -0.5}, {1, 1, 1.0}, {1, 2, -0.5}, {1, 3, s}}),
                      {0.0, 0.0}});
  } else {
    layers.push_back({SparseMatrix(3, 4,
                                   {{0, 0, 0.5}, {0, 1, -1.0}, {0, 2, 0.5},
                                    {1, 0, -0.5}, {1, 1, 1.0}, {1, 2, -0.5}, {2, 3, 1.0}}),
                      {1.0, 1.0, 0.0}});
    const SparseMatrix A(3, 3, {{0, 0, 0.25}, {0, 1, -0.25}, {1, 0, -0.25}, {1, 1, 0.25}, {2, 2, 1.0}});
    for (int k = 0; k < p.L - 6; ++k) layers.push_back({A, {1.0, 1.0, 0.0}});
    const double s = inv_Csqrtn;
    layers.push_back({SparseMatrix(2, 3, {{0, 0, 0.25}, {0, 1, -0.25}, {0, 2, s}, {1, 0, -0.25}, {1, 1, 0.25}, {1, 2, s}}),
                      {0.0, 0.0}});
  }
  layers.push_back({E, {0.0}});

  inv.A1 = layers[0].weights.nonzeros();
  inv.b1 = layers[0].bias_nonzeros();
  inv.A2 = layers[1].weights.nonzeros();
  inv.b2 = layers[1].bias_nonzeros();
  inv.A3 = layers[2].weights.nonzeros();
  inv.b3 = layers[2].bias_nonzeros();
  inv.D = layers[3].weights.nonzeros();
  inv.alpha = layers[3].bias_nonzeros();
  if (p.L >= 6) {
    inv.repeats = static_cast<std::size_t>(p.L - 6);
    inv.A = inv.repeats > 0 ? layers[4].weights.nonzeros() : 5;
    inv.K = layers[layers.size() - 2].weights.nonzeros();
  }
  inv.E = layers.back().weights.nonzeros();

  NeuralNetwork net(std::move(layers));
  const double log2_amp = hat_amplitude_log2(p.n, p.L, p.C, M);
  const long bits = wide_precision_bits(net, 1.0);
  return HatNetwork{std::move(net), p, std::exp2(log2_amp), log2_amp, inv, bits};
}

/// The hat network with output layer multiplied by `factor`.
inline HatNetwork scale_hat_output(const HatNetwork& hat, double factor) {
  std::vector<Layer> layers = hat.net.layers();
  auto& last = layers.back();
  last.weights = last.weights.scaled(factor);
  for (auto& b : last.bias) b *= factor;
  HatNetwork out = hat;
  out.net = NeuralNetwork(std::move(layers));
  out.amplitude *= factor;
  out.amplitude_log2 += std::log2(std::abs(factor));
  return out;
}

}  // namespace requ_gap
