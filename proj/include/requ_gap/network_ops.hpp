#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "requ_gap/errors.hpp"
#include "requ_gap/network.hpp"

namespace requ_gap {

namespace detail {

inline std::vector<MatrixEntry> shifted(const SparseMatrix& m, std::size_t dr, std::size_t dc, double f = 1.0) {
  std::vector<MatrixEntry> out;
  out.reserve(m.nonzeros());
  for (const auto& e : m.entries()) out.push_back({e.row + dr, e.col + dc, e.value * f});
  return out;
}

inline Layer gamma_gadget() {
  return {SparseMatrix(2, 2, {{0, 0, 0.25}, {0, 1, -0.25}, {1, 0, -0.25}, {1, 1, 0.25}}), {1.0, 1.0}};
}

inline Layer lambda_gadget() { return {SparseMatrix(1, 2, {{0, 0, 0.25}, {0, 1, -0.25}}), {0.0}}; }

}  // namespace detail

/// Pads `net` to `target_depth` layers without changing its realization on
/// inputs where the output lies in [-1, 1]. The last layer is split into
/// (f + 1, 1 - f), carried through identity gadgets
/// Gamma = (1/4 [[1,-1],[-1,1]], (1,1)) and read out by Lambda = (1/4 (1,-1), 0),
/// using 1/4((1+f)^2 - (1-f)^2) = f.
inline NeuralNetwork depth_extend(const NeuralNetwork& net, std::size_t target_depth) {
  require(net.output_dim() == 1, "d_out == 1", "depth_extend needs a scalar network");
  require(target_depth >= net.depth(), "target_depth >= depth",
          "cannot shorten a network from depth " + std::to_string(net.depth()) + " to " +
              std::to_string(target_depth));
  if (target_depth == net.depth()) return net;

  const auto& src = net.layers();
  const std::size_t k = src.size();
  std::vector<Layer> layers;

  if (k == 1) {
    const Layer& last = src[0];
    const std::size_t d = last.weights.cols();
    std::vector<MatrixEntry> e = detail::shifted(last.weights, 0, 0, 0.5);
    auto neg = detail::shifted(last.weights, 1, 0, -0.5);
    e.insert(e.end(), neg.begin(), neg.end());
    const double b = last.bias[0];
    layers.push_back({SparseMatrix(2, d, std::move(e)), {0.5 * (b + 1.0), 0.5 * (1.0 - b)}});
    if (target_depth == 2) {
      layers.push_back({SparseMatrix(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}}), {0.0}});
      return NeuralNetwork(std::move(layers));
    }
    layers.push_back({SparseMatrix(2, 2, {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 1.0}}), {1.0, 1.0}});
  } else {
    for (std::size_t j = 0; j + 2 < k; ++j) layers.push_back(src[j]);
    // constant neuron: row of zeros with bias 1, so rho2 gives 1
    const Layer& prev = src[k - 2];
    Layer with_one{SparseMatrix(prev.weights.rows() + 1, prev.weights.cols(), prev.weights.entries()), prev.bias};
    with_one.bias.push_back(1.0);
    layers.push_back(std::move(with_one));

    const Layer& last = src[k - 1];
    const std::size_t one_col = last.weights.cols();
    std::vector<MatrixEntry> e = detail::shifted(last.weights, 0, 0);
    auto neg = detail::shifted(last.weights, 1, 0, -1.0);
    e.insert(e.end(), neg.begin(), neg.end());
    e.push_back({0, one_col, 1.0});
    e.push_back({1, one_col, 1.0});
    layers.push_back({SparseMatrix(2, one_col + 1, std::move(e)), {last.bias[0], -last.bias[0]}});
  }
  while (layers.size() + 1 < target_depth) layers.push_back(detail::gamma_gadget());
  layers.push_back(detail::lambda_gadget());
  return NeuralNetwork(std::move(layers));
}

/// Network realizing x -> R(net1)(x) + R(net2)(x). The shallower network is
/// first depth-extended, so both realizations must lie in [-1, 1] on the
/// domain of interest.
inline NeuralNetwork sum_networks(const NeuralNetwork& net1, const NeuralNetwork& net2) {
  require(net1.input_dim() == net2.input_dim(), "equal input dims",
          "cannot sum networks with input dims " + std::to_string(net1.input_dim()) + " and " +
              std::to_string(net2.input_dim()));
  require(net1.output_dim() == 1 && net2.output_dim() == 1, "d_out == 1", "sum_networks needs scalar networks");
  const std::size_t depth = std::max(net1.depth(), net2.depth());
  const NeuralNetwork a = depth_extend(net1, depth);
  const NeuralNetwork b = depth_extend(net2, depth);
  const auto& la = a.layers();
  const auto& lb = b.layers();
  const std::size_t d = a.input_dim();

  std::vector<Layer> layers;
  if (depth == 1) {
    auto e = detail::shifted(la[0].weights, 0, 0);
    for (const auto& x : lb[0].weights.entries()) {
      auto it = std::find_if(e.begin(), e.end(), [&](const MatrixEntry& y) { return y.col == x.col; });
      if (it != e.end()) it->value += x.value;
      else e.push_back(x);
    }
    layers.push_back({SparseMatrix(1, d, std::move(e)), {la[0].bias[0] + lb[0].bias[0]}});
    return NeuralNetwork(std::move(layers));
  }

  // first layer: both nets read the same input
  {
    const std::size_t ra = la[0].weights.rows();
    auto e = detail::shifted(la[0].weights, 0, 0);
    auto e2 = detail::shifted(lb[0].weights, ra, 0);
    e.insert(e.end(), e2.begin(), e2.end());
    std::vector<double> bias = la[0].bias;
    bias.insert(bias.end(), lb[0].bias.begin(), lb[0].bias.end());
    layers.push_back({SparseMatrix(ra + lb[0].weights.rows(), d, std::move(e)), std::move(bias)});
  }
  // hidden layers: block diagonal
  for (std::size_t m = 1; m + 1 < depth; ++m) {
    const auto& A = la[m].weights;
    const auto& B = lb[m].weights;
    auto e = detail::shifted(A, 0, 0);
    auto e2 = detail::shifted(B, A.rows(), A.cols());
    e.insert(e.end(), e2.begin(), e2.end());
    std::vector<double> bias = la[m].bias;
    bias.insert(bias.end(), lb[m].bias.begin(), lb[m].bias.end());
    layers.push_back({SparseMatrix(A.rows() + B.rows(), A.cols() + B.cols(), std::move(e)), std::move(bias)});
  }
  // output: (A^1 | A^2), summed bias
  {
    const auto& A = la.back().weights;
    const auto& B = lb.back().weights;
    auto e = detail::shifted(A, 0, 0);
    auto e2 = detail::shifted(B, 0, A.cols());
    e.insert(e.end(), e2.begin(), e2.end());
    layers.push_back({SparseMatrix(1, A.cols() + B.cols(), std::move(e)), {la.back().bias[0] + lb.back().bias[0]}});
  }
  return NeuralNetwork(std::move(layers));
}

/// Removes layers whose matrix is zero. Such a layer (or a fully zero first
/// layer) outputs a constant, so everything before it collapses into a new
/// first layer (0, b). The result has the same realization everywhere and
/// depth <= max(W, 1).
inline NeuralNetwork eliminate_dead_layers(const NeuralNetwork& net) {
  std::vector<Layer> layers = net.layers();
  const std::size_t d = net.input_dim();
  for (;;) {
    std::size_t cut = 0;
    bool found = false;
    for (std::size_t j = layers.size(); j-- > 1;) {
      if (layers[j].weights.nonzeros() == 0) {
        cut = j;
        found = true;
        break;
      }
    }
    if (!found && layers.size() > 1 && layers[0].weight_count() == 0) {
      // rho2(0) = 0 feeds layer 1, which then outputs its bias
      cut = 1;
      found = true;
    }
    if (!found) break;
    std::vector<Layer> next;
    next.push_back({SparseMatrix(layers[cut].weights.rows(), d), layers[cut].bias});
    next.insert(next.end(), layers.begin() + static_cast<std::ptrdiff_t>(cut) + 1, layers.end());
    layers = std::move(next);
  }
  return NeuralNetwork(std::move(layers));
}

/// Largest |R(net)(x)| over `samples` uniform points of [lo, hi]^d. A cheap
/// runtime monitor for the boundedness precondition of depth_extend.
inline double sampled_output_bound(const NeuralNetwork& net, double lo, double hi, std::size_t samples,
                                   std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(net.input_dim());
  double m = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : x) v = u(rng);
    for (double v : realize(net, x)) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace requ_gap
