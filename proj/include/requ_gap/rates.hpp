#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/network.hpp"

namespace requ_gap {

/// A bound carried as log2 so doubly exponential values never wrap.
/// `value` is +inf (and `overflow` set) once 2^log2 leaves the double range.
struct LogValue {
  double value = 0.0;
  double log2 = -std::numeric_limits<double>::infinity();
  bool overflow = false;

  static LogValue from_log2(double l) {
    LogValue v;
    v.log2 = l;
    if (l >= 1024.0) {
      v.value = std::numeric_limits<double>::infinity();
      v.overflow = true;
    } else {
      v.value = std::exp2(l);
    }
    return v;
  }
};

struct GammaPair {
  double flat = 0.0;
  double sharp = 0.0;
  std::string method;
};

/// (2^l* - 1)(theta_c + 1/2) for parametric policies; +inf when l* = inf.
inline GammaPair gamma_closed_form(const GrowthPolicy& policy) {
  require(policy.is_parametric(), "parametric policy", "closed form needs a parametric policy; use gamma_numeric");
  const auto ell = policy.max_depth();
  if (!ell) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, "closed_form"};
  }
  const double g = (std::ldexp(1.0, *ell) - 1.0) * (policy.theta_c() + 0.5);
  return {g, g, "closed_form"};
}

/// log of max_{1 <= L <= l*} c(n)^(2^L - 1) n^((2^L - 1)/2)
inline double growth_expression_log(const GrowthPolicy& policy, int max_depth, std::uint64_t n) {
  const double c = policy.coef(n);
  const double base = std::log(c) + 0.5 * std::log(static_cast<double>(n));
  const int L = base > 0.0 ? max_depth : 1;
  return (std::ldexp(1.0, L) - 1.0) * base;
}

struct GammaFitOptions {
  double window_lo = 10.0;
  std::size_t grid_points = 200;
};

/// Least-squares slope of log(max_L c(n)^(2^L-1) n^((2^L-1)/2)) against log n
/// over a geometric grid of n in [window_lo, n_max]. For parametric policies
/// with kappa_c != 0 the fit includes log log 2n as a nuisance regressor so
/// the slope is not biased by the log factor. Both estimates are the slope.
inline GammaPair gamma_numeric(const GrowthPolicy& policy, std::uint64_t n_max, GammaFitOptions opt = {}) {
  require(n_max >= 100, "n_max >= 100", "gamma_numeric needs n_max >= 100");
  require(policy.max_coef() > 0.0, "c not identically zero", "degenerate policy with c == 0");
  const auto ell = policy.max_depth();
  if (!ell) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, "numeric"};
  }
  std::vector<std::uint64_t> grid;
  const double lo = std::log(opt.window_lo);
  const double hi = std::log(static_cast<double>(n_max));
  for (std::size_t k = 0; k < opt.grid_points; ++k) {
    const double t = opt.grid_points == 1 ? hi : lo + (hi - lo) * static_cast<double>(k) / (opt.grid_points - 1.0);
    const auto n = static_cast<std::uint64_t>(std::llround(std::exp(t)));
    if (grid.empty() || n != grid.back()) grid.push_back(n);
  }
  for (std::uint64_t n : grid) {
    require(policy.coef(n) > 0.0, "c(n) > 0", "policy has c(n) = 0 inside the fit window");
  }
  const bool nuisance = policy.is_parametric() && policy.kappa_c() != 0.0;
  const Eigen::Index cols = nuisance ? 3 : 2;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(grid.size()), cols);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double n = static_cast<double>(grid[k]);
    const auto r = static_cast<Eigen::Index>(k);
    X(r, 0) = std::log(n);
    X(r, 1) = 1.0;
    if (nuisance) X(r, 2) = std::log(std::log(2.0 * n));
    Y(r) = growth_expression_log(policy, *ell, grid[k]);
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(Y);
  return {beta(0), beta(0), "numeric"};
}

/// gamma from the closed form when available, else the numeric fit.
inline GammaPair gamma_for(const GrowthPolicy& policy, std::uint64_t n_max = 100000) {
  return policy.is_parametric() ? gamma_closed_form(policy) : gamma_numeric(policy, n_max);
}

/// R_j = (2 sqrt(n) C)^(2^j - 1) R0^(2^(j-1))
inline LogValue radius_recursion(double R0, double C, double n, int j) {
  require(R0 >= 1.0, "R0 >= 1", "radius must be >= 1");
  require(C >= 1.0, "C >= 1", "C must be >= 1");
  require(n >= 1.0, "n >= 1", "n must be >= 1");
  require(j >= 1, "j >= 1", "radius recursion starts at j = 1");
  const double l = (std::ldexp(1.0, j) - 1.0) * (1.0 + 0.5 * std::log2(n) + std::log2(C)) +
                   std::ldexp(1.0, j - 1) * std::log2(R0);
  return LogValue::from_log2(l);
}

/// R_1 = 2 sqrt(n) C R_0, then R_j = 2 sqrt(n) C R_{j-1}^2, in double; +inf on overflow.
inline double radius_iterated(double R0, double C, double n, int j) {
  double R = 2.0 * std::sqrt(n) * C * R0;
  for (int k = 1; k < j; ++k) R = 2.0 * std::sqrt(n) * C * R * R;
  return R;
}

enum class LipschitzNorm { l1, linf, unit_cube_l1, unit_cube_linf };

struct LipschitzBoundInput {
  int L = 1;
  double C = 1.0;
  double n = 1.0;
  double R = 1.0;
  std::size_t d = 1;
  LipschitzNorm norm = LipschitzNorm::l1;
};

/// 2^(2^L + L - 3) R^(2^(L-1) - 1) C^(2^L - 1) n^((2^L - 1)/2), times d for
/// the l-inf norm; R = sqrt(d) on the unit cube.
inline LogValue lipschitz_bound(const LipschitzBoundInput& in) {
  require(in.L >= 1, "L >= 1", "depth must be positive");
  require(in.C >= 1.0 && std::isfinite(in.C), "C >= 1", "C must be finite and >= 1");
  require(in.n >= 1.0 && std::isfinite(in.n), "n >= 1", "n must be finite and >= 1");
  require(in.d >= 1, "d >= 1", "dimension must be positive");
  const bool cube = in.norm == LipschitzNorm::unit_cube_l1 || in.norm == LipschitzNorm::unit_cube_linf;
  const double R = cube ? std::sqrt(static_cast<double>(in.d)) : in.R;
  require(R >= 1.0 && std::isfinite(R), "R >= 1", "radius must be finite and >= 1");
  const double e = std::ldexp(1.0, in.L) - 1.0;
  double l = (std::ldexp(1.0, in.L) + in.L - 3.0) + (std::ldexp(1.0, in.L - 1) - 1.0) * std::log2(R) +
             e * std::log2(in.C) + 0.5 * e * std::log2(in.n);
  if (in.norm == LipschitzNorm::linf || in.norm == LipschitzNorm::unit_cube_linf) {
    l += std::log2(static_cast<double>(in.d));
  }
  return LogValue::from_log2(l);
}

struct RateWindow {
  double alpha = 1.0;
  std::size_t d = 1;
  double gamma_flat = 0.0;
  double gamma_sharp = 0.0;
  double lower_rate = 0.0;
  double upper_rate = 0.0;
  bool degenerate = false;
  std::string method;
};

inline RateWindow rate_window(double alpha, std::size_t d, double gamma_flat, double gamma_sharp) {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha > 0", "alpha must be positive");
  require(d >= 1, "d >= 1", "dimension must be positive");
  require(gamma_flat >= 0.0 && gamma_sharp >= gamma_flat, "0 <= gamma_flat <= gamma_sharp",
          "need 0 <= gamma_flat <= gamma_sharp");
  RateWindow w;
  w.alpha = alpha;
  w.d = d;
  w.gamma_flat = gamma_flat;
  w.gamma_sharp = gamma_sharp;
  const double dd = static_cast<double>(d);
  if (std::isinf(gamma_flat) || std::isinf(gamma_sharp)) {
    w.degenerate = true;
    w.lower_rate = 0.0;
    w.upper_rate = std::isinf(gamma_flat) ? 0.0 : 64.0 * alpha / (dd * (8.0 * alpha + gamma_flat));
    return w;
  }
  w.lower_rate = alpha / (dd * (alpha + gamma_sharp));
  w.upper_rate = 64.0 * alpha / (dd * (8.0 * alpha + gamma_flat));
  return w;
}

inline RateWindow rate_window(double alpha, std::size_t d, const GrowthPolicy& policy, std::uint64_t n_max = 100000) {
  const GammaPair g = gamma_for(policy, n_max);
  RateWindow w = rate_window(alpha, d, g.flat, g.sharp);
  w.method = g.method;
  return w;
}

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit_cube(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }
  [[nodiscard]] std::size_t dim() const { return lo.size(); }
};

struct EmpiricalLipschitz {
  double value = 0.0;
  std::size_t pairs = 0;
};

/// max |f(x) - f(x')| / ||x - x'|| over random pairs and small-offset pairs
/// drawn from the box. `eval` maps a point to the scalar output.
template <class Eval>
EmpiricalLipschitz empirical_lipschitz(Eval&& eval, const Box& box, std::size_t samples, LipschitzNorm norm,
                                       std::uint64_t seed = 7) {
  require(samples >= 100, "samples >= 100", "empirical_lipschitz needs at least 100 samples");
  require(box.lo.size() == box.hi.size() && !box.lo.empty(), "box", "box bounds must have equal positive length");
  const std::size_t d = box.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const bool l1 = norm == LipschitzNorm::l1 || norm == LipschitzNorm::unit_cube_l1;
  auto point = [&](std::vector<double>& x) {
    for (std::size_t j = 0; j < d; ++j) x[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * u(rng);
  };
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s = l1 ? s + std::abs(a[j] - b[j]) : std::max(s, std::abs(a[j] - b[j]));
    return s;
  };
  std::vector<double> x(d), x2(d);
  EmpiricalLipschitz out;
  const double offsets[] = {1e-2, 1e-4, 1e-6};
  for (std::size_t s = 0; s < samples; ++s) {
    point(x);
    const double fx = eval(x);
    for (int k = 0; k < 4; ++k) {
      if (k == 0) {
        point(x2);
      } else {
        for (std::size_t j = 0; j < d; ++j) {
          const double h = offsets[k - 1] * (box.hi[j] - box.lo[j]) * (2.0 * u(rng) - 1.0);
          x2[j] = std::clamp(x[j] + h, box.lo[j], box.hi[j]);
        }
      }
      const double r = dist(x, x2);
      if (r <= 0.0) continue;
      out.value = std::max(out.value, std::abs(fx - eval(x2)) / r);
      ++out.pairs;
    }
  }
  return out;
}

inline EmpiricalLipschitz empirical_lipschitz(const NeuralNetwork& net, const Box& box, std::size_t samples,
                                              LipschitzNorm norm, std::uint64_t seed = 7) {
  return empirical_lipschitz([&](const std::vector<double>& x) { return realize(net, x).front(); }, box, samples, norm,
                             seed);
}

/// Bound parameters that certify membership of `net` in Sigma_n:
/// L = depth, C = max(max_norm, 1), n = max(W, 1).
inline LipschitzBoundInput lipschitz_input_for(const NeuralNetwork& net, LipschitzNorm norm, double R = 1.0) {
  return {static_cast<int>(net.depth()), std::max(net.max_norm(), 1.0),
          std::max(static_cast<double>(net.weight_count()), 1.0), R, net.input_dim(), norm};
}

}  // namespace requ_gap
