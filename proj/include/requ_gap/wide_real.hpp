#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "requ_gap/network.hpp"

namespace requ_gap {

// Binary-precision floating point backed by MPFR. New values take the
// precision of the innermost PrecisionScope on the current thread.
class WideReal {
 public:
  WideReal() : WideReal(0.0) {}

  explicit WideReal(double v) {
    mpfr_init2(value_, current_bits());
    mpfr_set_d(value_, v, MPFR_RNDN);
  }

  WideReal(const WideReal& other) {
    mpfr_init2(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }

  WideReal(WideReal&& other) noexcept {
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_swap(value_, other.value_);
  }

  WideReal& operator=(const WideReal& other) {
    if (this != &other) {
      mpfr_set_prec(value_, mpfr_get_prec(other.value_));
      mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
  }

  WideReal& operator=(WideReal&& other) noexcept {
    mpfr_swap(value_, other.value_);
    return *this;
  }

  ~WideReal() { mpfr_clear(value_); }

  WideReal& operator+=(const WideReal& rhs) {
    mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
    return *this;
  }
  WideReal& operator-=(const WideReal& rhs) {
    mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
    return *this;
  }
  WideReal& operator*=(const WideReal& rhs) {
    mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
    return *this;
  }

  friend WideReal operator+(WideReal lhs, const WideReal& rhs) { return lhs += rhs; }
  friend WideReal operator-(WideReal lhs, const WideReal& rhs) { return lhs -= rhs; }
  friend WideReal operator*(WideReal lhs, const WideReal& rhs) { return lhs *= rhs; }
  friend WideReal operator-(WideReal v) {
    mpfr_neg(v.value_, v.value_, MPFR_RNDN);
    return v;
  }

  friend bool operator>(const WideReal& a, const WideReal& b) { return mpfr_greater_p(a.value_, b.value_) != 0; }
  friend bool operator<(const WideReal& a, const WideReal& b) { return mpfr_less_p(a.value_, b.value_) != 0; }

  [[nodiscard]] double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  [[nodiscard]] long precision() const { return static_cast<long>(mpfr_get_prec(value_)); }

  static mpfr_prec_t current_bits() { return scope_bits(); }

 private:
  friend class PrecisionScope;
  static mpfr_prec_t& scope_bits() {
    thread_local mpfr_prec_t bits = 256;
    return bits;
  }

  mpfr_t value_;
};

/// Sets the precision of WideReal values created on this thread until the
/// scope ends.
class PrecisionScope {
 public:
  explicit PrecisionScope(long bits) : previous_(WideReal::scope_bits()) {
    WideReal::scope_bits() = static_cast<mpfr_prec_t>(std::max<long>(bits, MPFR_PREC_MIN));
  }
  ~PrecisionScope() { WideReal::scope_bits() = previous_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t previous_;
};

/// Upper bound on log2 of every pre- and post-activation magnitude reached by
/// the network for inputs with |x_i| <= input_bound.
inline double activation_log2_bound(const NeuralNetwork& net, double input_bound) {
  double log2_h = std::log2(std::max(input_bound, 1.0));
  double peak = log2_h;
  const auto& layers = net.layers();
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const auto& layer = layers[j];
    const double row_sum = layer.weights.max_row_abs_sum();
    double bias_max = 0.0;
    for (double b : layer.bias) bias_max = std::max(bias_max, std::abs(b));
    // |T x| <= rowsum * |h| + |b| <= 2 max(rowsum * |h|, |b|)
    const double a = row_sum > 0.0 ? std::log2(row_sum) + log2_h : -1e300;
    const double b = bias_max > 0.0 ? std::log2(bias_max) : -1e300;
    log2_h = std::max({a, b, 0.0}) + 1.0;
    peak = std::max(peak, log2_h);
    if (j + 1 < layers.size()) {
      log2_h *= 2.0;
      peak = std::max(peak, log2_h);
    }
  }
  return peak;
}

/// Working precision for realize_mixed: enough bits to resolve unit-scale
/// differences between values of the largest magnitude the network can reach.
inline long wide_precision_bits(const NeuralNetwork& net, double input_bound) {
  return static_cast<long>(std::ceil(activation_log2_bound(net, input_bound))) + 160;
}

/// Evaluates layers [0, first_wide_layer) in double and the remaining layers
/// in WideReal with `bits` of precision. The doubly exponential weight
/// growth of deep ReQU gadgets makes the final layers cancel catastrophically
/// in double, while the wide early layers are well conditioned.
inline std::vector<double> realize_mixed(const NeuralNetwork& net, std::span<const double> x,
                                         std::size_t first_wide_layer, long bits) {
  detail::check_input(net, x.size());
  const auto& layers = net.layers();
  first_wide_layer = std::min(first_wide_layer, layers.size());

  std::vector<double> h(x.begin(), x.end());
  for (std::size_t j = 0; j < first_wide_layer; ++j) {
    h = detail::apply_layer<double>(layers[j], h);
    if (j + 1 < layers.size()) {
      for (auto& v : h) v = rho2(v);
    }
  }
  if (first_wide_layer == layers.size()) return h;

  PrecisionScope scope(bits);
  std::vector<WideReal> w;
  w.reserve(h.size());
  for (double v : h) w.emplace_back(v);
  for (std::size_t j = first_wide_layer; j < layers.size(); ++j) {
    w = detail::apply_layer<WideReal>(layers[j], w);
    if (j + 1 < layers.size()) {
      for (auto& v : w) v = rho2(v);
    }
  }
  std::vector<double> out;
  out.reserve(w.size());
  for (const auto& v : w) out.push_back(v.to_double());
  return out;
}

/// Full wide-precision evaluation with automatically chosen precision.
inline std::vector<double> realize_wide(const NeuralNetwork& net, std::span<const double> x) {
  double input_bound = 1.0;
  for (double v : x) input_bound = std::max(input_bound, std::abs(v));
  return realize_mixed(net, x, 0, wide_precision_bits(net, input_bound));
}

}  // namespace requ_gap
