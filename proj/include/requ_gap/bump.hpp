#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/errors.hpp"
#include "requ_gap/network.hpp"

namespace requ_gap {

/// Parameters (d, M, y, p) of the bump lambda^p_{M,y} and its lifts.
struct BumpSpec {
  std::size_t d = 1;
  double M = 1.0;
  std::vector<double> y{0.0};
  int p = 2;

  BumpSpec() = default;
  BumpSpec(double M_, std::vector<double> y_, int p_ = 2) : d(y_.size()), M(M_), y(std::move(y_)), p(p_) {
    validate();
  }

  void validate() const {
    require(d >= 1 && y.size() == d, "len(y) == d >= 1", "bump centre must have d >= 1 coordinates");
    require(M > 0.0 && std::isfinite(M), "M > 0", "bump width parameter M must be positive");
    require(p >= 1, "p >= 1", "bump power p must be a positive integer");
    for (double v : y) require(std::isfinite(v), "y finite", "bump centre must be finite");
  }
};

inline double ipow(double x, int p) {
  double out = 1.0;
  for (int k = 0; k < p; ++k) out *= x;
  return out;
}

/// One-dimensional bump (1 - |M(x-y)|^p)^p on |x-y| <= 1/M, zero elsewhere.
inline double lambda_p(double M, double y, int p, double x) {
  const double t = M * (x - y);
  if (!(std::abs(t) < 1.0)) return 0.0;
  return ipow(1.0 - ipow(std::abs(t), p), p);
}

inline double lambda_p(const BumpSpec& spec, double x) {
  require(spec.d == 1, "d == 1", "lambda_p takes a one-dimensional spec");
  return lambda_p(spec.M, spec.y[0], spec.p, x);
}

/// Heaviside-like ramp 2(rho2(x) - 2 rho2(x - 1/2) + rho2(x - 1)).
inline double theta_step(double x) {
  return 2.0 * (rho2(x) - 2.0 * rho2(x - 0.5) + rho2(x - 1.0));
}

/// Sum_j lambda^2_{M,y_j}(x_j) - (d - 1)
inline double delta(const BumpSpec& spec, std::span<const double> x) {
  require(x.size() == spec.d, "len(x) == d", "point dimension does not match the bump");
  double s = 0.0;
  for (std::size_t j = 0; j < spec.d; ++j) s += lambda_p(spec.M, spec.y[j], 2, x[j]);
  return s - static_cast<double>(spec.d - 1);
}

/// theta(Delta(x)); vanishes exactly outside y + (-1/M, 1/M)^d.
inline double vartheta(const BumpSpec& spec, std::span<const double> x) {
  require(spec.p == 2, "p == 2", "vartheta is defined for p = 2");
  return theta_step(delta(spec, x));
}

/// True when x lies in the open support cube y + (-1/M, 1/M)^d.
inline bool in_support(const BumpSpec& spec, std::span<const double> x) {
  for (std::size_t j = 0; j < spec.d; ++j) {
    if (!(std::abs(spec.M * (x[j] - spec.y[j])) < 1.0)) return false;
  }
  return true;
}

/// Lower bound of theta on the cube y + [-1/(2dM), 1/(2dM)]^d.
inline double theta_floor_constant() {
  const double r = 9.0 - 4.0 * std::sqrt(3.0);
  return 2.0 / 81.0 * r * r;
}

/// sup |(lambda^2_{M,y})'| = 8M / (3 sqrt 3), attained at y +- 1/(sqrt(3) M).
inline double lambda2_lipschitz(double M) { return 8.0 * M / (3.0 * std::sqrt(3.0)); }

/// Two-hidden-layer network for M^-4 lambda^2_{M,y}:
/// rho2(1/M^2 - (rho2(x - y) + rho2(y - x))) followed by an identity output.
inline NeuralNetwork lambda_network(double M, double y) {
  require(M >= 1.0 && std::isfinite(M), "M >= 1", "lambda_network needs M >= 1");
  require(std::isfinite(y), "y finite", "centre must be finite");
  std::vector<Layer> layers;
  layers.push_back({SparseMatrix(2, 1, {{0, 0, 1.0}, {1, 0, -1.0}}), {-y, y}});
  layers.push_back({SparseMatrix(1, 2, {{0, 0, -1.0}, {0, 1, -1.0}}), {1.0 / (M * M)}});
  layers.push_back({SparseMatrix(1, 1, {{0, 0, 1.0}}), {0.0}});
  return NeuralNetwork(std::move(layers));
}

}  // namespace requ_gap
