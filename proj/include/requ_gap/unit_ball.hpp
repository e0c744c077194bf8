#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/bump.hpp"
#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/hat_network.hpp"
#include "requ_gap/membership.hpp"
#include "requ_gap/rates.hpp"

namespace requ_gap {

struct UnitBallOptions {
  std::uint64_t n_scan = 1000000;  // C1 is the sup over n <= n_scan
  std::uint64_t gamma_n_max = 100000;
};

/// Constants making kappa M^(-64a/(8a+g)) vartheta_{M,y} a member of the
/// unit ball, for every M >= 1.
struct UnitBallCertificate {
  double alpha = 1.0;
  double gamma = 1.0;
  double gamma_flat = 0.0;
  std::size_t d = 1;
  int L = 5;
  std::uint64_t n0 = 1;
  double C1 = 1.0;
  double C1_log2 = 0.0;
  double kappa = 1.0;
  double kappa_log2 = 0.0;
  std::uint64_t n_scan = 0;
  bool tail_ok = true;  // n^g / (C(n)^(2^L-1) n^((2^L-1)/2)) decreases past n_scan

  // M-dependent part
  double M = 1.0;
  std::uint64_t n = 1;  // n0 * ceil(M^(8/(8a+g)))
  double C = 1.0;       // largest C with C^8 <= c(n)
  double amplitude = 1.0;
  double amplitude_log2 = 0.0;

  /// 64 a / (8 a + g)
  [[nodiscard]] double decay_exponent() const { return 64.0 * alpha / (8.0 * alpha + gamma); }
  /// 16 n^8 d + 7 L
  [[nodiscard]] double weight_threshold() const {
    return 16.0 * std::pow(static_cast<double>(n), 8) * static_cast<double>(d) + 7.0 * L;
  }
};

/// g_{M,y} = amplitude * vartheta_{M,y}, evaluated in closed form.
struct ScaledBump {
  BumpSpec spec;
  double amplitude = 0.0;

  [[nodiscard]] double operator()(std::span<const double> x) const { return amplitude * vartheta(spec, x); }
};

namespace detail {

inline double hat_ratio_log2(const GrowthPolicy& policy, int L, double gamma, std::uint64_t n) {
  const double C = choose_C(policy.coef(n));
  const double e = std::ldexp(1.0, L) - 1.0;
  const double ln = std::log2(static_cast<double>(n));
  return gamma * ln - e * (std::log2(C) + 0.5 * ln);
}

/// least n with l(n) >= L
inline std::uint64_t least_n_with_depth(const GrowthPolicy& policy, int L) {
  std::uint64_t hi = 1;
  while (policy.depth(hi) < L) {
    require(hi < (std::uint64_t{1} << 62), "l(n) >= L reachable", "depth L is never reached by l(n)");
    hi *= 2;
  }
  std::uint64_t lo = hi / 2 + (hi == 1 ? 1 : 0);
  if (hi == 1) return 1;
  // l(lo) < L <= l(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (policy.depth(mid) >= L ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

/// Fills the M-independent constants L, n0, C1 and kappa.
inline UnitBallCertificate unit_ball_constants(double alpha, double gamma, std::size_t d, const GrowthPolicy& policy,
                                               UnitBallOptions opt = {}) {
  require(alpha > 0.0 && std::isfinite(alpha), "alpha > 0", "alpha must be positive");
  require(d >= 1, "d >= 1", "dimension must be positive");
  const auto ell = policy.max_depth();
  require(!ell || *ell >= 5, "l* >= 5", "the policy must reach depth 5");
  require(policy.coef(1) >= 1.0, "c(1) >= 1", "the policy needs c(n) >= 1");
  const GammaPair g = gamma_for(policy, opt.gamma_n_max);
  require(gamma > 0.0 && gamma < g.flat, "0 < gamma < gamma_flat",
          "gamma = " + std::to_string(gamma) + " must lie in (0, " + std::to_string(g.flat) + ")");

  UnitBallCertificate cert;
  cert.alpha = alpha;
  cert.gamma = gamma;
  cert.gamma_flat = g.flat;
  cert.d = d;
  cert.n_scan = opt.n_scan;

  // with C = c(n)^(1/8) the achievable growth exponent at depth L is
  // (2^L - 1)(theta_c / 8 + 1/2) for parametric policies
  if (policy.is_parametric()) {
    int L = 5;
    const int cap = ell.value_or(std::numeric_limits<int>::max());
    while (L < cap && L < 60 && !(gamma < (std::ldexp(1.0, L) - 1.0) * (policy.theta_c() / 8.0 + 0.5))) ++L;
    cert.L = L;
    cert.tail_ok = gamma < (std::ldexp(1.0, L) - 1.0) * (policy.theta_c() / 8.0 + 0.5);
  } else {
    cert.L = *ell;
    const double c_last = policy.rows().back().coef;
    cert.tail_ok = std::isinf(c_last) || gamma < (std::ldexp(1.0, cert.L) - 1.0) / 2.0;
    cert.tail_ok = cert.tail_ok && policy.rows().back().n <= opt.n_scan;
  }
  cert.n0 = detail::least_n_with_depth(policy, cert.L);

  double sup = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= opt.n_scan; ++n) sup = std::max(sup, detail::hat_ratio_log2(policy, cert.L, gamma, n));
  cert.C1_log2 = sup;
  cert.C1 = std::exp2(sup);

  const double first = -alpha * (std::log2(16.0 * d + 7.0 * cert.L) + 8.0 * std::log2(2.0 * cert.n0));
  cert.kappa_log2 = std::min(first, -sup);
  cert.kappa = std::exp2(cert.kappa_log2);
  return cert;
}

/// Completes the certificate for a given M.
inline UnitBallCertificate unit_ball_certificate(UnitBallCertificate cert, double M, const GrowthPolicy& policy) {
  require(M >= 1.0 && std::isfinite(M), "M >= 1", "M must be >= 1");
  cert.M = M;
  const double k = std::ceil(std::pow(M, 8.0 / (8.0 * cert.alpha + cert.gamma)));
  cert.n = cert.n0 * static_cast<std::uint64_t>(k);
  cert.C = choose_C(policy.coef(cert.n));
  cert.amplitude_log2 = cert.kappa_log2 - cert.decay_exponent() * std::log2(M);
  cert.amplitude = std::exp2(cert.amplitude_log2);
  return cert;
}

struct UnitBallBump {
  ScaledBump g;
  UnitBallCertificate cert;
};

/// g_{M,y} = kappa M^(-64a/(8a+g)) vartheta_{M,y} with its certificate.
inline UnitBallBump scaled_unit_ball_bump(double alpha, double gamma, double M, std::vector<double> y,
                                          const GrowthPolicy& policy, UnitBallOptions opt = {}) {
  const std::size_t d = y.size();
  UnitBallCertificate cert = unit_ball_certificate(unit_ball_constants(alpha, gamma, d, policy, opt), M, policy);
  return {ScaledBump{BumpSpec(M, std::move(y)), cert.amplitude}, cert};
}

struct UnitBallReport {
  double threshold = 0.0;  // 16 n^8 d + 7 L
  // small t: t^alpha ||g||_inf <= 1 for t <= min(t_max, threshold)
  bool branch1_pass = true;
  std::optional<std::uint64_t> branch1_first_failure;
  double branch1_worst = 0.0;  // max t^alpha ||g||_inf over the range
  // large t: g is realized inside Sigma_threshold
  bool branch2_checked = false;
  bool branch2_pass = false;
  bool branch2_materialized = false;
  double hat_scale = 0.0;  // factor applied to the hat network's output layer
  std::vector<std::string> violations;

  [[nodiscard]] bool pass() const { return branch1_pass && (!branch2_checked || branch2_pass); }
};

/// Checks both cases of the unit-ball argument for t = 1..t_max.
inline UnitBallReport verify_unit_ball_certificate(const ScaledBump& g, const UnitBallCertificate& cert,
                                                   const GrowthPolicy& policy, std::uint64_t t_max) {
  UnitBallReport rep;
  rep.threshold = cert.weight_threshold();
  const double sup = std::abs(g.amplitude);  // vartheta peaks at 1

  const double t_hi = std::min(static_cast<double>(t_max), std::floor(rep.threshold));
  rep.branch1_worst = std::pow(t_hi, cert.alpha) * sup;
  if (t_hi >= 1.0 && rep.branch1_worst > 1.0) {
    rep.branch1_pass = false;
    // t^alpha sup > 1  <=>  t > sup^(-1/alpha)
    auto t = static_cast<std::uint64_t>(std::floor(std::pow(sup, -1.0 / cert.alpha)));
    while (t > 1 && std::pow(static_cast<double>(t), cert.alpha) * sup > 1.0) --t;
    while (std::pow(static_cast<double>(t), cert.alpha) * sup <= 1.0) ++t;
    rep.branch1_first_failure = t;
    rep.violations.push_back("t^alpha ||g||_inf > 1 at t = " + std::to_string(t));
  }

  if (static_cast<double>(t_max) <= rep.threshold) return rep;
  rep.branch2_checked = true;

  // g = s * R(hat) with hat of depth L built from (n, C); s <= 4 by the choice of kappa
  const double amp_log2 = hat_amplitude_log2(cert.n, cert.L, cert.C, g.spec.M);
  rep.hat_scale = std::exp2(std::log2(sup) - amp_log2);
  const double sign = g.amplitude < 0.0 ? -1.0 : 1.0;
  const auto T = static_cast<std::uint64_t>(std::ceil(rep.threshold));
  const SigmaBudget budget{T, policy};
  bool ok = true;
  if (cert.L > policy.depth(cert.n)) {
    ok = false;
    rep.violations.push_back("L > l(n)");
  }
  if (ipow(cert.C, 8) > policy.coef(cert.n)) {
    ok = false;
    rep.violations.push_back("C^8 > c(n)");
  }
  const double blocks = std::pow(static_cast<double>(cert.n), 8) * static_cast<double>(g.spec.d);
  if (ok && blocks <= static_cast<double>(kMaxHatBlocks)) {
    HatBuildParams p;
    p.n = cert.n;
    p.L = cert.L;
    p.C = cert.C;
    p.spec = g.spec;
    p.policy = policy;
    const HatNetwork hat = scale_hat_output(build_hat_network(p), sign * rep.hat_scale);
    const MembershipReport m = check_membership(hat.net, budget, g.spec.d);
    rep.branch2_materialized = true;
    for (const auto& v : m.violations) rep.violations.push_back(v);
    ok = m.member;
  } else if (ok) {
    // structural bounds: W <= 16 n^8 d + 7L, depth L, entries <= max(C^8, 1/4 * s, 1)
    const double max_entry = std::max({ipow(cert.C, 8), 0.25 * rep.hat_scale, 1.0});
    if (cert.L > budget.depth_limit()) {
      ok = false;
      rep.violations.push_back("depth exceeds l(T)");
    }
    if (max_entry > budget.coef_limit()) {
      ok = false;
      rep.violations.push_back("weight magnitude exceeds c(T)");
    }
  }
  rep.branch2_pass = ok;
  return rep;
}

}  // namespace requ_gap
