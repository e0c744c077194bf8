#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/errors.hpp"

namespace requ_gap {

using Point = std::vector<double>;
using Reconstruction = std::function<double(std::span<const double>)>;

/// Sample points X in [0,1]^d and a reconstruction map Q from the m sampled
/// values to a function on [0,1]^d.
struct SamplingAlgorithm {
  std::string label;
  std::size_t d = 1;
  std::vector<Point> points;
  std::function<Reconstruction(std::vector<double>)> reconstruct;

  [[nodiscard]] std::size_t sample_count() const { return points.size(); }

  /// A(u) = Q(u(x_1), ..., u(x_m))
  template <class F>
  [[nodiscard]] Reconstruction apply(F&& u) const {
    std::vector<double> values;
    values.reserve(points.size());
    for (const auto& x : points) values.push_back(u(std::span<const double>(x)));
    return reconstruct(std::move(values));
  }
};

/// Largest N with N^d <= m.
inline std::size_t integer_root_floor(std::uint64_t m, std::size_t d) {
  require(m >= 1 && d >= 1, "m >= 1, d >= 1", "integer root needs positive arguments");
  auto pow_le = [&](std::uint64_t r) {
    long double p = 1.0L;
    for (std::size_t k = 0; k < d; ++k) p *= static_cast<long double>(r);
    return p <= static_cast<long double>(m);
  };
  auto r = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(m), 1.0 / static_cast<double>(d))));
  while (r > 1 && !pow_le(r)) --r;
  while (pow_le(r + 1)) ++r;
  return static_cast<std::size_t>(std::max<std::uint64_t>(r, 1));
}

/// Smallest r with r^d >= m.
inline std::size_t integer_root_ceil(std::uint64_t m, std::size_t d) {
  const std::size_t r = integer_root_floor(m, d);
  long double p = 1.0L;
  for (std::size_t k = 0; k < d; ++k) p *= static_cast<long double>(r);
  return p >= static_cast<long double>(m) ? r : r + 1;
}

enum class GridMode { nearest, multilinear };

inline const char* to_string(GridMode mode) { return mode == GridMode::nearest ? "nearest" : "multilinear"; }

/// Samples on {0, 1/N, ..., (N-1)/N}^d with N = floor(m^(1/d)). Points are
/// stored in row-major order, last coordinate fastest.
inline SamplingAlgorithm grid_algorithm(std::uint64_t m, std::size_t d, GridMode mode) {
  const std::size_t N = integer_root_floor(m, d);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= N;
  SamplingAlgorithm alg;
  alg.label = std::string("grid-") + to_string(mode);
  alg.d = d;
  alg.points.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point x(d);
    std::size_t rest = idx;
    for (std::size_t j = d; j-- > 0;) {
      x[j] = static_cast<double>(rest % N) / static_cast<double>(N);
      rest /= N;
    }
    alg.points.push_back(std::move(x));
  }
  alg.reconstruct = [N, d, mode](std::vector<double> values) -> Reconstruction {
    auto data = std::make_shared<const std::vector<double>>(std::move(values));
    const double Nd = static_cast<double>(N);
    if (mode == GridMode::nearest || N == 1) {
      return [data, N, d, Nd](std::span<const double> x) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < d; ++j) {
          // nearest node k/N; ties go to the lower index
          const double k = std::ceil(x[j] * Nd - 0.5);
          const auto kk = static_cast<std::size_t>(std::clamp(k, 0.0, Nd - 1.0));
          flat = flat * N + kk;
        }
        return (*data)[flat];
      };
    }
    return [data, N, d, Nd](std::span<const double> x) {
      std::vector<std::size_t> base(d);
      std::vector<double> w(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double t = std::clamp(x[j] * Nd, 0.0, Nd - 1.0);
        const double k0 = std::min(std::floor(t), Nd - 2.0);
        base[j] = static_cast<std::size_t>(k0);
        w[j] = t - k0;
      }
      // corner values, then nested a + w (b - a) so constants come back exactly
      std::vector<double> v(std::size_t{1} << d);
      for (std::size_t corner = 0; corner < v.size(); ++corner) {
        std::size_t flat = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const bool up = (corner >> (d - 1 - j)) & 1U;
          flat = flat * N + base[j] + (up ? 1 : 0);
        }
        v[corner] = (*data)[flat];
      }
      for (std::size_t j = d; j-- > 0;) {
        const std::size_t half = std::size_t{1} << j;
        for (std::size_t k = 0; k < half; ++k) v[k] = v[2 * k] + w[j] * (v[2 * k + 1] - v[2 * k]);
      }
      return v[0];
    };
  };
  return alg;
}

/// Nearest sampled value (Euclidean; ties to the lower sample index).
inline Reconstruction nearest_neighbour(std::shared_ptr<const std::vector<Point>> pts, std::vector<double> values) {
  if (values.empty() || std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    const double c = values.empty() ? 0.0 : values.front();
    return [c](std::span<const double>) { return c; };
  }
  auto data = std::make_shared<const std::vector<double>>(std::move(values));
  return [pts, data](std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts->size(); ++i) {
      const auto& p = (*pts)[i];
      double s = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) s += (p[j] - x[j]) * (p[j] - x[j]);
      if (s < best_d) {
        best_d = s;
        best = i;
      }
    }
    return (*data)[best];
  };
}

inline SamplingAlgorithm from_points(std::string label, std::size_t d, std::vector<Point> points) {
  SamplingAlgorithm alg;
  alg.label = std::move(label);
  alg.d = d;
  alg.points = std::move(points);
  auto shared = std::make_shared<const std::vector<Point>>(alg.points);
  alg.reconstruct = [shared](std::vector<double> values) { return nearest_neighbour(shared, std::move(values)); };
  return alg;
}

/// m uniform points in [0,1]^d with nearest-neighbour reconstruction.
inline SamplingAlgorithm random_points_algorithm(std::uint64_t m, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(m, Point(d));
  for (auto& p : pts) {
    for (auto& v : p) v = u(rng);
  }
  return from_points("random-nearest", d, std::move(pts));
}

/// Samples the grid of grid_algorithm but always reconstructs Q = 0.
inline SamplingAlgorithm zero_algorithm(std::uint64_t m, std::size_t d) {
  SamplingAlgorithm alg = grid_algorithm(m, d, GridMode::nearest);
  alg.label = "zero";
  alg.reconstruct = [](std::vector<double>) -> Reconstruction { return [](std::span<const double>) { return 0.0; }; };
  return alg;
}

/// splitmix64 finalizer over (seed, a, b): independent per-draw streams.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

/// A random family (A_omega, m(omega)); generate(seed, m, d) draws one member.
/// The sample count may vary with omega; its mean must not exceed m.
struct MonteCarloAlgorithm {
  std::string label;
  std::function<SamplingAlgorithm(std::uint64_t seed, std::uint64_t m, std::size_t d)> generate;
};

inline MonteCarloAlgorithm mc_random_points() {
  return {"mc-random-nearest",
          [](std::uint64_t seed, std::uint64_t m, std::size_t d) { return random_points_algorithm(m, d, seed); }};
}

/// Each of 2m uniform candidates is kept with probability 1/2, so E[m(omega)] = m.
inline MonteCarloAlgorithm mc_thinned_points() {
  return {"mc-thinned-nearest", [](std::uint64_t seed, std::uint64_t m, std::size_t d) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::bernoulli_distribution keep(0.5);
            std::vector<Point> pts;
            for (std::uint64_t k = 0; k < 2 * m; ++k) {
              Point p(d);
              for (auto& v : p) v = u(rng);
              if (keep(rng)) pts.push_back(std::move(p));
            }
            return from_points("thinned-nearest", d, std::move(pts));
          }};
}

/// Degenerate randomness: every draw is the same deterministic algorithm.
inline MonteCarloAlgorithm mc_fixed(std::function<SamplingAlgorithm(std::uint64_t m, std::size_t d)> factory,
                                    std::string label) {
  return {std::move(label),
          [factory = std::move(factory)](std::uint64_t, std::uint64_t m, std::size_t d) { return factory(m, d); }};
}

}  // namespace requ_gap
