#pragma once

// Reference implementations used only by the tests. They are written
// independently of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "requ_gap/network.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const requ_gap::SparseMatrix& m) {
  Dense a(m.rows(), std::vector<double>(m.cols(), 0.0));
  for (const auto& e : m.entries()) a[e.row][e.col] = e.value;
  return a;
}

/// Forward pass with dense matrices in long double.
inline std::vector<long double> realize(const requ_gap::NeuralNetwork& net, const std::vector<double>& x) {
  std::vector<long double> h(x.begin(), x.end());
  for (std::size_t j = 0; j < net.depth(); ++j) {
    const auto& layer = net.layer(j);
    const Dense a = to_dense(layer.weights);
    std::vector<long double> out(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      long double s = layer.bias[r];
      for (std::size_t c = 0; c < h.size(); ++c) s += static_cast<long double>(a[r][c]) * h[c];
      out[r] = s;
    }
    if (j + 1 < net.depth()) {
      for (auto& v : out) v = v > 0 ? v * v : 0.0L;
    }
    h = std::move(out);
  }
  return h;
}

/// (1 - M^2 (x - y)^2)^2 inside |x - y| < 1/M
inline double lambda2(double M, double y, double x) {
  const double u = M * M * (x - y) * (x - y);
  return u < 1.0 ? (1.0 - u) * (1.0 - u) : 0.0;
}

/// piecewise form of the ramp: 2x^2 on [0,1/2], 1 - 2(1-x)^2 on [1/2,1]
inline double ramp(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x <= 0.5) return 2.0 * x * x;
  return 1.0 - 2.0 * (1.0 - x) * (1.0 - x);
}

inline double bump(double M, const std::vector<double>& y, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) s += lambda2(M, y[j], x[j]);
  return ramp(s - static_cast<double>(y.size() - 1));
}

/// Midpoint-rule estimate of ||bump||_p^p over its support cube with k cells per axis.
inline double bump_lp_power(double M, const std::vector<double>& y, double p, std::size_t k) {
  const std::size_t d = y.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= k;
  const double h = 2.0 / M / static_cast<double>(k);
  double cell = 1.0;
  for (std::size_t j = 0; j < d; ++j) cell *= h;
  double s = 0.0;
  std::vector<double> x(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = y[j] - 1.0 / M + (static_cast<double>(rest % k) + 0.5) * h;
      rest /= k;
    }
    s += std::pow(bump(M, y, x), p) * cell;
  }
  return s;
}

/// Number of centres whose bump is zero at every point.
inline std::size_t brute_unseen(const std::vector<std::vector<double>>& centres, double M,
                                const std::vector<std::vector<double>>& points) {
  std::size_t unseen = 0;
  for (const auto& y : centres) {
    bool hit = false;
    for (const auto& x : points) hit = hit || bump(M, y, x) != 0.0;
    unseen += hit ? 0 : 1;
  }
  return unseen;
}

inline requ_gap::NeuralNetwork random_network(std::mt19937_64& rng, const std::vector<std::size_t>& dims,
                                              double density = 0.7, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::bernoulli_distribution keep(density);
  std::vector<requ_gap::Layer> layers;
  for (std::size_t j = 1; j < dims.size(); ++j) {
    std::vector<requ_gap::MatrixEntry> e;
    for (std::size_t r = 0; r < dims[j]; ++r) {
      for (std::size_t c = 0; c < dims[j - 1]; ++c) {
        if (keep(rng)) e.push_back({r, c, u(rng)});
      }
    }
    std::vector<double> b(dims[j]);
    for (auto& v : b) v = keep(rng) ? u(rng) : 0.0;
    layers.push_back({requ_gap::SparseMatrix(dims[j], dims[j - 1], std::move(e)), std::move(b)});
  }
  return requ_gap::NeuralNetwork(std::move(layers));
}

/// Same network with the final layer multiplied by f.
inline requ_gap::NeuralNetwork scale_last(const requ_gap::NeuralNetwork& net, double f) {
  auto layers = net.layers();
  layers.back().weights = layers.back().weights.scaled(f);
  for (auto& b : layers.back().bias) b *= f;
  return requ_gap::NeuralNetwork(std::move(layers));
}

inline std::vector<std::vector<double>> uniform_points(std::mt19937_64& rng, std::size_t count, std::size_t d,
                                                       double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::vector<double>> pts(count, std::vector<double>(d));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return pts;
}

/// Rescales a random scalar network so |output| <= target on the given points.
inline requ_gap::NeuralNetwork bounded_network(std::mt19937_64& rng, const std::vector<std::size_t>& dims,
                                               const std::vector<std::vector<double>>& pts, double target) {
  auto net = random_network(rng, dims);
  long double peak = 0.0L;
  for (const auto& x : pts) peak = std::max(peak, std::abs(realize(net, x)[0]));
  if (peak == 0.0L) return net;
  return scale_last(net, target / static_cast<double>(peak));
}

}  // namespace oracle
