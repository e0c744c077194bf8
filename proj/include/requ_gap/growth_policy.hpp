#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "requ_gap/errors.hpp"

namespace requ_gap {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Depth-growth l(n) and coefficient-growth c(n) of the network classes.
///
/// Parametric form:
///   c(n) = ceil(scale * max(f(1), f(n))),  f(n) = n^theta_c * (log 2n)^kappa_c
///   l(n) = min(depth_cap, depth_floor + depth_per_doubling * floor(log2 n))
/// The max(f(1), .) keeps c non-decreasing when kappa_c < 0 (f has a single
/// interior minimum in that case). depth_cap == nullopt means unbounded.
///
/// Tabulated form: step functions given by rows (n_i, l_i, c_i) with n_0 = 1;
/// the value at n is taken from the last row with n_i <= n.
class GrowthPolicy {
 public:
  struct Row {
    std::uint64_t n = 1;
    int depth = 5;
    double coef = 1.0;  // may be kUnbounded
  };

  static GrowthPolicy parametric(double theta_c, double kappa_c, double scale, std::optional<int> depth_cap,
                                 std::optional<int> depth_floor = std::nullopt, int depth_per_doubling = -1) {
    require(theta_c >= 0.0 && std::isfinite(theta_c), "theta_c >= 0", "theta_c must be finite and >= 0");
    require(std::isfinite(kappa_c), "kappa_c finite", "kappa_c must be finite");
    require(scale >= 1.0 && std::isfinite(scale), "scale >= 1", "scale must be finite and >= 1");
    require(!depth_cap || *depth_cap >= 1, "depth_cap >= 1", "depth cap must be positive");
    GrowthPolicy p;
    p.kind_ = Kind::parametric;
    p.theta_c_ = theta_c;
    p.kappa_c_ = kappa_c;
    p.scale_ = scale;
    p.depth_cap_ = depth_cap;
    if (depth_per_doubling < 0) depth_per_doubling = depth_cap ? 0 : 1;
    p.depth_per_doubling_ = depth_per_doubling;
    p.depth_floor_ = depth_floor.value_or(depth_cap && depth_per_doubling == 0 ? *depth_cap : 5);
    require(p.depth_floor_ >= 1, "depth_floor >= 1", "depth floor must be positive");
    require(depth_cap || depth_per_doubling > 0, "unbounded depth grows",
            "an unbounded depth cap needs depth_per_doubling > 0");
    return p;
  }

  /// Constant policy l(n) = depth, c(n) = coef.
  static GrowthPolicy constant(int depth, double coef) { return parametric(0.0, 0.0, coef, depth); }

  static GrowthPolicy tabulated(std::vector<Row> rows) {
    require(!rows.empty(), "rows non-empty", "tabulated policy needs at least one row");
    require(rows.front().n == 1, "first row n == 1", "tabulated policy must start at n = 1");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      require(rows[k].depth >= 1, "depth >= 1", "tabulated depth must be positive");
      require(rows[k].coef >= 0.0, "coef >= 0", "tabulated coefficient must be non-negative");
      if (k > 0) {
        require(rows[k].n > rows[k - 1].n, "rows strictly increasing in n", "tabulated rows must increase in n");
        require(rows[k].depth >= rows[k - 1].depth && rows[k].coef >= rows[k - 1].coef, "non-decreasing",
                "tabulated l(n) and c(n) must be non-decreasing");
      }
    }
    GrowthPolicy p;
    p.kind_ = Kind::tabulated;
    p.rows_ = std::move(rows);
    return p;
  }

  [[nodiscard]] bool is_parametric() const noexcept { return kind_ == Kind::parametric; }
  [[nodiscard]] double theta_c() const noexcept { return theta_c_; }
  [[nodiscard]] double kappa_c() const noexcept { return kappa_c_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] std::optional<int> depth_cap() const noexcept { return depth_cap_; }
  [[nodiscard]] int depth_floor() const noexcept { return depth_floor_; }
  [[nodiscard]] int depth_per_doubling() const noexcept { return depth_per_doubling_; }
  [[nodiscard]] const std::vector<Row>& rows() const noexcept { return rows_; }

  /// l(n)
  [[nodiscard]] int depth(std::uint64_t n) const {
    require(n >= 1, "n >= 1", "growth functions are defined for n >= 1");
    if (kind_ == Kind::tabulated) return row_for(n).depth;
    const auto doublings = static_cast<std::int64_t>(std::floor(std::log2(static_cast<double>(n))));
    const std::int64_t grown = depth_floor_ + depth_per_doubling_ * doublings;
    const std::int64_t capped = depth_cap_ ? std::min<std::int64_t>(grown, *depth_cap_) : grown;
    return static_cast<int>(std::min<std::int64_t>(capped, std::numeric_limits<int>::max()));
  }

  /// c(n)
  [[nodiscard]] double coef(std::uint64_t n) const {
    require(n >= 1, "n >= 1", "growth functions are defined for n >= 1");
    if (kind_ == Kind::tabulated) return row_for(n).coef;
    return std::ceil(scale_ * std::max(shape(1.0), shape(static_cast<double>(n))));
  }

  /// l* = sup_n l(n); nullopt when unbounded.
  [[nodiscard]] std::optional<int> max_depth() const {
    if (kind_ == Kind::tabulated) return rows_.back().depth;
    if (depth_per_doubling_ == 0) {
      return depth_cap_ ? std::min(depth_floor_, *depth_cap_) : depth_floor_;
    }
    return depth_cap_;
  }

  /// c* = sup_n c(n); kUnbounded when c grows without bound.
  [[nodiscard]] double max_coef() const {
    if (kind_ == Kind::tabulated) return rows_.back().coef;
    if (theta_c_ == 0.0 && kappa_c_ <= 0.0) return coef(1);
    return kUnbounded;
  }

  /// log of the non-rounded parametric growth f(n); used by exponent checks.
  [[nodiscard]] double shape(double n) const {
    return std::pow(n, theta_c_) * std::pow(std::log(2.0 * n), kappa_c_);
  }

 private:
  enum class Kind { parametric, tabulated };

  [[nodiscard]] const Row& row_for(std::uint64_t n) const {
    auto it = std::upper_bound(rows_.begin(), rows_.end(), n, [](std::uint64_t v, const Row& r) { return v < r.n; });
    return *std::prev(it);
  }

  Kind kind_ = Kind::parametric;
  double theta_c_ = 0.0;
  double kappa_c_ = 0.0;
  double scale_ = 1.0;
  std::optional<int> depth_cap_;
  int depth_floor_ = 5;
  int depth_per_doubling_ = 0;
  std::vector<Row> rows_;
};

/// Budget of the class Sigma_n: weight count n, depth l(n), magnitude c(n).
struct SigmaBudget {
  std::uint64_t n = 1;
  GrowthPolicy policy = GrowthPolicy::constant(5, 1.0);

  [[nodiscard]] int depth_limit() const { return policy.depth(n); }
  [[nodiscard]] double coef_limit() const { return policy.coef(n); }
};

}  // namespace requ_gap
