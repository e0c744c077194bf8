#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "requ_gap/adversarial.hpp"
#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/rates.hpp"
#include "requ_gap/sampling.hpp"

namespace requ_gap {

struct UpperBoundOptions {
  std::uint64_t n_scan = 1000000;  // C0 = sup over n <= n_scan
};

/// Constants of the grid reconstruction bound
///   ||f - Xi(Psi(f))|| <= 6 n^-a + 2 mu / N <= C2 m^(-a/(d(g+a))).
struct ReconstructionBound {
  int L = 0;
  double C0_log2 = 0.0;  // sup_n c(n)^(2^L-1) n^((2^L-1)/2) / n^g
  double C1_log2 = 0.0;  // d 2^(2^L+L-3) d^((2^(L-1)-1)/2) C0
  double C2_log2 = 0.0;  // log2(6 + 2^(g+2) C1)
  double exponent = 0.0;  // -a/(d(g+a))
  LogValue bound;         // C2 m^exponent
  LogValue direct;        // 6 n^-a + 2 mu / N with N = floor(m^(1/d)), n = ceil(m^(1/(d(a+g))))
};

inline double log2_sum(double a, double b) {
  const double hi = std::max(a, b), lo = std::min(a, b);
  if (std::isinf(hi) && hi < 0) return hi;
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

inline ReconstructionBound reconstruction_error_bound(std::uint64_t m, std::size_t d, const GrowthPolicy& policy,
                                                      double alpha, double gamma, UpperBoundOptions opt = {}) {
  require(m >= 1 && d >= 1, "m >= 1, d >= 1", "m and d must be positive");
  require(alpha > 0.0 && gamma > 0.0, "alpha, gamma > 0", "alpha and gamma must be positive");
  const auto ell = policy.max_depth();
  require(ell.has_value(), "l* < inf", "the upper bound needs a bounded depth");
  ReconstructionBound out;
  out.L = *ell;
  const double e = std::ldexp(1.0, out.L) - 1.0;
  const double dd = static_cast<double>(d);

  double sup = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= opt.n_scan; ++n) {
    const double c = policy.coef(n);
    require(std::isfinite(c), "c(n) finite", "the upper bound needs finite c(n)");
    const double ln = std::log2(static_cast<double>(n));
    sup = std::max(sup, e * (std::log2(c) + 0.5 * ln) - gamma * ln);
  }
  out.C0_log2 = sup;
  const double lip_const = std::log2(dd) + (std::ldexp(1.0, out.L) + out.L - 3.0) +
                           0.5 * (std::ldexp(1.0, out.L - 1) - 1.0) * std::log2(dd);
  out.C1_log2 = lip_const + out.C0_log2;
  out.C2_log2 = log2_sum(std::log2(6.0), gamma + 2.0 + out.C1_log2);
  out.exponent = -alpha / (dd * (gamma + alpha));
  out.bound = LogValue::from_log2(out.C2_log2 + out.exponent * std::log2(static_cast<double>(m)));

  const double N = static_cast<double>(integer_root_floor(m, d));
  const double n = std::ceil(std::pow(static_cast<double>(m), 1.0 / (dd * (alpha + gamma))));
  const double mu_log2 = lip_const + e * (std::log2(policy.coef(static_cast<std::uint64_t>(n))) + 0.5 * std::log2(n));
  out.direct = LogValue::from_log2(log2_sum(std::log2(6.0) - alpha * std::log2(n), 1.0 + mu_log2 - std::log2(N)));
  return out;
}

/// sup over a tensor grid of `res` points per axis of |f - g|.
template <class F, class G>
double sup_error_on_grid(F&& f, G&& g, std::size_t d, std::size_t res) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= res;
  double sup = 0.0;
  std::vector<double> x(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t j = d; j-- > 0;) {
      x[j] = static_cast<double>(rest % res) / static_cast<double>(res - 1);
      rest /= res;
    }
    sup = std::max(sup, std::abs(f(std::span<const double>(x)) - g(std::span<const double>(x))));
  }
  return sup;
}

struct UpperBoundRow {
  std::uint64_t m = 0;
  double measured = 0.0;
  LogValue bound;
  bool within_bound = false;
};

struct UpperBoundAudit {
  std::vector<UpperBoundRow> rows;
  double fitted_exponent = 0.0;
  double theoretical_exponent = 0.0;  // -a/(d(g+a))
  bool slope_ok = false;              // fitted <= theoretical + 0.1
  bool bound_ok = false;
  [[nodiscard]] bool pass() const { return slope_ok && bound_ok; }
};

/// Grid reconstruction error of f for each m, against the bound and the decay exponent.
template <class F>
UpperBoundAudit audit_upper_bound(F&& f, const std::vector<std::uint64_t>& m_list, std::size_t d,
                                  const GrowthPolicy& policy, double alpha, double gamma, GridMode mode,
                                  std::size_t eval_res, UpperBoundOptions opt = {}) {
  require(!m_list.empty(), "m_list non-empty", "the m sweep is empty");
  UpperBoundAudit audit;
  audit.rows.resize(m_list.size());
  parallel_for(m_list.size(), [&](std::size_t k) {
    const std::uint64_t m = m_list[k];
    const SamplingAlgorithm alg = grid_algorithm(m, d, mode);
    const Reconstruction q = alg.apply(f);
    UpperBoundRow& row = audit.rows[k];
    row.m = m;
    row.measured = sup_error_on_grid(f, q, d, eval_res);
    row.bound = reconstruction_error_bound(m, d, policy, alpha, gamma, opt).bound;
    row.within_bound = row.measured <= row.bound.value;
  });
  std::vector<double> ms, ys;
  audit.bound_ok = true;
  for (const auto& r : audit.rows) {
    audit.bound_ok = audit.bound_ok && r.within_bound;
    ms.push_back(static_cast<double>(r.m));
    ys.push_back(std::max(r.measured, std::numeric_limits<double>::min()));
  }
  audit.fitted_exponent = loglog_slope(ms, ys);
  audit.theoretical_exponent = -alpha / (static_cast<double>(d) * (gamma + alpha));
  audit.slope_ok = audit.fitted_exponent <= audit.theoretical_exponent + 0.1;
  return audit;
}

}  // namespace requ_gap
