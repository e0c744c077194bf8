#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/errors.hpp"
#include "requ_gap/sparse_matrix.hpp"

namespace requ_gap {

/// Rectified power unit max(0, x)^p.
template <class T>
T rho_p(const T& x, int p) {
  if (!(x > T(0))) return T(0);
  T out = x;
  for (int k = 1; k < p; ++k) out *= x;
  return out;
}

/// ReQU activation max(0, x)^2.
template <class T>
T rho2(const T& x) {
  return x > T(0) ? T(x * x) : T(0);
}

struct Layer {
  SparseMatrix weights;
  std::vector<double> bias;

  [[nodiscard]] std::size_t bias_nonzeros() const {
    return static_cast<std::size_t>(std::count_if(bias.begin(), bias.end(), [](double b) { return b != 0.0; }));
  }
  [[nodiscard]] std::size_t weight_count() const { return weights.nonzeros() + bias_nonzeros(); }
  [[nodiscard]] double max_abs() const {
    double m = weights.max_abs();
    for (double b : bias) m = std::max(m, std::abs(b));
    return m;
  }

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// A ReQU network: L affine maps with the activation applied after every
/// layer except the last. Immutable once constructed.
class NeuralNetwork {
 public:
  explicit NeuralNetwork(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("a network needs at least one layer");
    for (std::size_t j = 0; j < layers_.size(); ++j) {
      const auto& layer = layers_[j];
      if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
        throw std::invalid_argument("layer " + std::to_string(j) + " has an empty dimension");
      }
      if (layer.bias.size() != layer.weights.rows()) {
        throw std::invalid_argument("layer " + std::to_string(j) + ": bias length " +
                                    std::to_string(layer.bias.size()) + " != rows " +
                                    std::to_string(layer.weights.rows()));
      }
      for (double b : layer.bias) {
        if (!std::isfinite(b)) throw std::invalid_argument("layer " + std::to_string(j) + ": bias not finite");
      }
      if (j > 0 && layer.weights.cols() != layers_[j - 1].weights.rows()) {
        throw std::invalid_argument("layer " + std::to_string(j) + ": expects input of size " +
                                    std::to_string(layer.weights.cols()) + " but layer " + std::to_string(j - 1) +
                                    " produces " + std::to_string(layers_[j - 1].weights.rows()));
      }
    }
  }

  [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }
  [[nodiscard]] const Layer& layer(std::size_t j) const { return layers_.at(j); }
  [[nodiscard]] std::size_t input_dim() const noexcept { return layers_.front().weights.cols(); }
  [[nodiscard]] std::size_t output_dim() const noexcept { return layers_.back().weights.rows(); }
  [[nodiscard]] std::size_t depth() const noexcept { return layers_.size(); }

  /// Number of nonzero weights and biases.
  [[nodiscard]] std::size_t weight_count() const {
    std::size_t w = 0;
    for (const auto& layer : layers_) w += layer.weight_count();
    return w;
  }

  /// Largest absolute matrix or bias entry.
  [[nodiscard]] double max_norm() const {
    double m = 0.0;
    for (const auto& layer : layers_) m = std::max(m, layer.max_abs());
    return m;
  }

  /// (N_0, ..., N_L)
  [[nodiscard]] std::vector<std::size_t> architecture() const {
    std::vector<std::size_t> dims{input_dim()};
    for (const auto& layer : layers_) dims.push_back(layer.weights.rows());
    return dims;
  }

  friend bool operator==(const NeuralNetwork&, const NeuralNetwork&) = default;

 private:
  std::vector<Layer> layers_;
};

namespace detail {

template <class T>
std::vector<T> apply_layer(const Layer& layer, std::span<const T> input) {
  std::vector<T> out(layer.bias.begin(), layer.bias.end());
  layer.weights.multiply_add<T>(input, out);
  return out;
}

inline void check_input(const NeuralNetwork& net, std::size_t size) {
  if (size != net.input_dim()) {
    throw PreconditionError("len(x) == input_dim", "input has length " + std::to_string(size) +
                                                       " but the network expects " + std::to_string(net.input_dim()));
  }
}

}  // namespace detail

/// Evaluates the realization T_L o (rho2 o T_{L-1}) o ... o (rho2 o T_1) in
/// scalar type T.
template <class T>
std::vector<T> realize(const NeuralNetwork& net, std::span<const T> x) {
  detail::check_input(net, x.size());
  std::vector<T> h(x.begin(), x.end());
  const auto& layers = net.layers();
  for (std::size_t j = 0; j < layers.size(); ++j) {
    h = detail::apply_layer<T>(layers[j], h);
    if (j + 1 < layers.size()) {
      for (auto& v : h) v = rho2(v);
    }
  }
  return h;
}

inline std::vector<double> realize(const NeuralNetwork& net, std::span<const double> x) {
  return realize<double>(net, x);
}

/// Scalar output convenience for networks with output_dim == 1.
inline double realize_scalar(const NeuralNetwork& net, std::span<const double> x) {
  return realize<double>(net, x).front();
}

}  // namespace requ_gap
