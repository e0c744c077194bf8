#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "requ_gap/bump.hpp"
#include "requ_gap/errors.hpp"
#include "requ_gap/growth_policy.hpp"
#include "requ_gap/parallel.hpp"
#include "requ_gap/sampling.hpp"
#include "requ_gap/unit_ball.hpp"

namespace requ_gap {

/// {f_{i,nu} = nu * kappa1 M^(-64a/(8a+g)) vartheta_{M,y(i)}} with
/// M = 4 r, r = ceil(m^(1/d)), and (2r)^d centres y(i) = (2 i + 1) / M.
struct AdversarialFamily {
  std::uint64_t m = 1;
  std::size_t d = 1;
  double alpha = 1.0;
  double gamma = 1.0;
  std::size_t per_axis = 2;  // 2 r
  double M = 4.0;
  double kappa1 = 0.0;  // theoretical constant
  double kappa1_log2 = 0.0;
  std::optional<double> kappa1_override;
  UnitBallCertificate constants;

  [[nodiscard]] double decay_exponent() const { return 64.0 * alpha / (8.0 * alpha + gamma); }
  [[nodiscard]] double theoretical_amplitude() const { return std::exp2(amplitude_log2()); }
  [[nodiscard]] double amplitude_log2() const { return kappa1_log2 - decay_exponent() * std::log2(M); }
  /// Amplitude of the members actually evaluated (override when given).
  [[nodiscard]] double amplitude() const {
    return kappa1_override ? *kappa1_override * std::pow(M, -decay_exponent()) : theoretical_amplitude();
  }
  [[nodiscard]] std::size_t centre_count() const {
    std::size_t c = 1;
    for (std::size_t k = 0; k < d; ++k) c *= per_axis;
    return c;
  }
  [[nodiscard]] std::size_t member_count() const { return 2 * centre_count(); }

  /// Multi-index of centre `flat` (row-major, last coordinate fastest).
  [[nodiscard]] std::vector<std::size_t> index(std::size_t flat) const {
    std::vector<std::size_t> idx(d);
    for (std::size_t j = d; j-- > 0;) {
      idx[j] = flat % per_axis;
      flat /= per_axis;
    }
    return idx;
  }
  [[nodiscard]] Point centre(std::size_t flat) const {
    Point y(d);
    const auto idx = index(flat);
    for (std::size_t j = 0; j < d; ++j) y[j] = (2.0 * static_cast<double>(idx[j]) + 1.0) / M;
    return y;
  }
  [[nodiscard]] BumpSpec spec(std::size_t flat) const { return BumpSpec(M, centre(flat)); }
  /// f_{i,nu}(x)
  [[nodiscard]] double member(std::size_t flat, int nu, std::span<const double> x) const {
    return nu * amplitude() * vartheta(spec(flat), x);
  }
};

inline AdversarialFamily build_adversarial_family(std::uint64_t m, std::size_t d, double alpha, double gamma,
                                                  const GrowthPolicy& policy,
                                                  std::optional<double> kappa1_override = std::nullopt,
                                                  UnitBallOptions opt = {}) {
  require(m >= 1, "m >= 1", "sample budget must be positive");
  require(!kappa1_override || *kappa1_override > 0.0, "kappa1 > 0", "kappa override must be positive");
  AdversarialFamily fam;
  fam.m = m;
  fam.d = d;
  fam.alpha = alpha;
  fam.gamma = gamma;
  fam.constants = unit_ball_constants(alpha, gamma, d, policy, opt);
  const std::size_t r = integer_root_ceil(m, d);
  fam.per_axis = 2 * r;
  fam.M = 4.0 * static_cast<double>(r);
  fam.kappa1 = fam.constants.kappa;
  fam.kappa1_log2 = fam.constants.kappa_log2;
  fam.kappa1_override = kappa1_override;
  return fam;
}

/// Same family for a new m, reusing the M-independent constants.
inline AdversarialFamily rescale_family(const AdversarialFamily& base, std::uint64_t m) {
  AdversarialFamily fam = base;
  fam.m = m;
  const std::size_t r = integer_root_ceil(m, base.d);
  fam.per_axis = 2 * r;
  fam.M = 4.0 * static_cast<double>(r);
  return fam;
}

/// Centres whose bump is nonzero at x. Mathematically at most one; in
/// floating point a point on a shared cube face can touch two.
inline std::vector<std::size_t> touching_centres(const AdversarialFamily& fam, std::span<const double> x) {
  // the support cubes are (2k/M, (2k+2)/M); test the computed cube and its
  // neighbours so rounding in x*M/2 cannot misplace a point
  const std::size_t d = fam.d;
  std::vector<long long> k0(d);
  for (std::size_t j = 0; j < d; ++j) k0[j] = static_cast<long long>(std::floor(x[j] * fam.M / 2.0));
  std::size_t combos = 1;
  for (std::size_t j = 0; j < d; ++j) combos *= 3;
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    std::size_t flat = 0;
    bool ok = true;
    for (std::size_t j = 0; j < d; ++j) {
      const long long k = k0[j] + static_cast<long long>(rest % 3) - 1;
      rest /= 3;
      if (k < 0 || k >= static_cast<long long>(fam.per_axis)) {
        ok = false;
        break;
      }
      flat = flat * fam.per_axis + static_cast<std::size_t>(k);
    }
    if (ok && vartheta(fam.spec(flat), x) != 0.0) out.push_back(flat);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Lowest-index centre whose bump is nonzero at x, if any.
inline std::optional<std::size_t> owning_centre(const AdversarialFamily& fam, std::span<const double> x) {
  const auto all = touching_centres(fam, x);
  if (all.empty()) return std::nullopt;
  return all.front();
}

/// Per-centre flag: true when some sample point sees the bump.
inline std::vector<char> seen_centres(const AdversarialFamily& fam, const SamplingAlgorithm& alg) {
  require(alg.d == fam.d, "same d", "algorithm and family dimensions differ");
  std::vector<char> seen(fam.centre_count(), 0);
  for (const auto& x : alg.points) {
    for (std::size_t c : touching_centres(fam, x)) seen[c] = 1;
  }
  return seen;
}

/// |Gamma_X|: centres whose bump vanishes at every sample point.
inline std::size_t count_unseen(const AdversarialFamily& fam, const SamplingAlgorithm& alg) {
  const auto seen = seen_centres(fam, alg);
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
}

/// g^d points strictly inside the support cube of `y`, plus the centre.
inline std::vector<Point> probe_points(const AdversarialFamily& fam, const Point& y, std::size_t grid_res) {
  const std::size_t d = fam.d;
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= grid_res;
  std::vector<Point> out;
  out.reserve(total + 1);
  out.push_back(y);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point p(d);
    std::size_t rest = idx;
    for (std::size_t j = d; j-- > 0;) {
      const double k = static_cast<double>(rest % grid_res);
      rest /= grid_res;
      p[j] = y[j] + (-1.0 + 2.0 * (k + 1.0) / (static_cast<double>(grid_res) + 1.0)) / fam.M;
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct AverageError {
  double refined = 0.0;      // mean over members of the sup over probe points
  double centre_only = 0.0;  // mean over members of |f - A(f)| at the own centre
  std::size_t unseen = 0;
  std::vector<double> per_member;  // refined sup, index 2*centre + (nu < 0)
};

/// Average over all (i, nu) of ||f_{i,nu} - A(f_{i,nu})||_inf, with the sup
/// estimated on each member's own support cube and centre.
inline AverageError average_error(const AdversarialFamily& fam, const SamplingAlgorithm& alg, std::size_t grid_res) {
  require(grid_res >= 2, "grid_res >= 2", "need at least 2 probe points per support edge");
  const auto seen = seen_centres(fam, alg);
  const std::size_t centres = fam.centre_count();
  // unseen members sample only zeros and share the reconstruction Q(0)
  const Reconstruction q0 = alg.reconstruct(std::vector<double>(alg.points.size(), 0.0));
  AverageError out;
  out.unseen = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 0));
  out.per_member.assign(2 * centres, 0.0);
  std::vector<double> centre_err(2 * centres, 0.0);
  parallel_for(centres, [&](std::size_t c) {
    const BumpSpec spec = fam.spec(c);
    const auto probes = probe_points(fam, spec.y, grid_res);
    const double amp = fam.amplitude();
    for (int s = 0; s < 2; ++s) {
      const int nu = s == 0 ? 1 : -1;
      auto f = [&](std::span<const double> x) { return nu * amp * vartheta(spec, x); };
      const Reconstruction q = seen[c] ? alg.apply(f) : q0;
      double sup = 0.0;
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const double e = std::abs(f(probes[k]) - q(probes[k]));
        if (k == 0) centre_err[2 * c + s] = e;
        sup = std::max(sup, e);
      }
      out.per_member[2 * c + s] = sup;
    }
  });
  double sum = 0.0, sum_c = 0.0;
  for (std::size_t k = 0; k < 2 * centres; ++k) {
    sum += out.per_member[k];
    sum_c += centre_err[k];
  }
  out.refined = sum / static_cast<double>(2 * centres);
  out.centre_only = sum_c / static_cast<double>(2 * centres);
  return out;
}

/// kappa1 2^-(2d+24) m^(-64a/(d(8a+g))), as log2.
inline double hardness_bound_log2(std::uint64_t m, std::size_t d, double alpha, double gamma, double kappa1_log2) {
  return kappa1_log2 - (2.0 * static_cast<double>(d) + 24.0) -
         64.0 * alpha / (static_cast<double>(d) * (8.0 * alpha + gamma)) * std::log2(static_cast<double>(m));
}

inline double hardness_bound(std::uint64_t m, std::size_t d, double alpha, double gamma, double kappa1) {
  require(m >= 1 && d >= 1 && alpha > 0.0 && gamma > 0.0 && kappa1 > 0.0, "positive arguments",
          "hardness_bound needs positive arguments");
  return std::exp2(hardness_bound_log2(m, d, alpha, gamma, std::log2(kappa1)));
}

struct ExperimentRow {
  std::uint64_t m = 0;
  double measured = 0.0;
  double measured_centre = 0.0;
  double lower_bound = 0.0;  // with the theoretical kappa1
  double lower_bound_log2 = 0.0;
  std::optional<double> lower_bound_override;
  std::size_t unseen = 0;
  double amplitude = 0.0;
  double mean_samples = 0.0;
  bool budget_ok = true;
  bool pass = false;
};

struct ExperimentReport {
  std::string label;
  std::size_t d = 1;
  double alpha = 1.0;
  double gamma = 1.0;
  double kappa1 = 0.0;
  double kappa1_log2 = 0.0;
  std::optional<double> kappa1_override;
  std::size_t grid_res = 9;
  std::optional<std::uint64_t> seed;
  std::size_t draws = 0;
  std::vector<ExperimentRow> rows;
  double fitted_exponent = 0.0;   // slope of log measured against log m
  double theoretical_exponent = 0.0;  // -64a/(d(8a+g))
  bool budget_ok = true;
  bool pass = false;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

namespace detail {

inline void finish_report(ExperimentReport& rep) {
  std::vector<double> ms, ys;
  rep.pass = !rep.rows.empty();
  rep.budget_ok = true;
  for (const auto& r : rep.rows) {
    rep.pass = rep.pass && r.pass;
    rep.budget_ok = rep.budget_ok && r.budget_ok;
    if (r.measured > 0.0) {
      ms.push_back(static_cast<double>(r.m));
      ys.push_back(r.measured);
    }
  }
  rep.fitted_exponent = loglog_slope(ms, ys);
  rep.theoretical_exponent = -64.0 * rep.alpha / (static_cast<double>(rep.d) * (8.0 * rep.alpha + rep.gamma));
}

inline ExperimentRow make_row(const AdversarialFamily& fam, std::uint64_t m) {
  ExperimentRow row;
  row.m = m;
  row.lower_bound_log2 = hardness_bound_log2(m, fam.d, fam.alpha, fam.gamma, fam.kappa1_log2);
  row.lower_bound = std::exp2(row.lower_bound_log2);
  if (fam.kappa1_override) row.lower_bound_override = hardness_bound(m, fam.d, fam.alpha, fam.gamma, *fam.kappa1_override);
  row.amplitude = fam.amplitude();
  return row;
}

inline void check_m_list(const std::vector<std::uint64_t>& m_list) {
  require(!m_list.empty(), "m_list non-empty", "the m sweep is empty");
  for (std::size_t k = 0; k < m_list.size(); ++k) {
    require(m_list[k] >= 1, "m >= 1", "sample budgets must be positive");
    require(k == 0 || m_list[k] > m_list[k - 1], "m_list ascending", "the m sweep must be strictly ascending");
  }
}

}  // namespace detail

using AlgorithmFactory = std::function<SamplingAlgorithm(std::uint64_t m, std::size_t d)>;

/// Measured average error against the hardness bound for each m.
inline ExperimentReport run_hardness_sweep(const AlgorithmFactory& factory, const std::vector<std::uint64_t>& m_list,
                                           const AdversarialFamily& base, std::size_t grid_res = 9) {
  detail::check_m_list(m_list);
  ExperimentReport rep;
  rep.d = base.d;
  rep.alpha = base.alpha;
  rep.gamma = base.gamma;
  rep.kappa1 = base.kappa1;
  rep.kappa1_log2 = base.kappa1_log2;
  rep.kappa1_override = base.kappa1_override;
  rep.grid_res = grid_res;
  for (std::uint64_t m : m_list) {
    const AdversarialFamily fam = rescale_family(base, m);
    const SamplingAlgorithm alg = factory(m, base.d);
    if (rep.label.empty()) rep.label = alg.label;
    ExperimentRow row = detail::make_row(fam, m);
    const AverageError err = average_error(fam, alg, grid_res);
    row.measured = err.refined;
    row.measured_centre = err.centre_only;
    row.unseen = err.unseen;
    row.mean_samples = static_cast<double>(alg.sample_count());
    row.budget_ok = alg.sample_count() <= m;
    row.pass = row.measured >= row.lower_bound && row.budget_ok;
    rep.rows.push_back(row);
  }
  detail::finish_report(rep);
  return rep;
}

inline ExperimentReport run_hardness_sweep(const AlgorithmFactory& factory, const std::vector<std::uint64_t>& m_list,
                                           std::size_t d, double alpha, double gamma, const GrowthPolicy& policy,
                                           std::size_t grid_res = 9,
                                           std::optional<double> kappa1_override = std::nullopt) {
  detail::check_m_list(m_list);
  return run_hardness_sweep(factory, m_list,
                            build_adversarial_family(m_list.front(), d, alpha, gamma, policy, kappa1_override),
                            grid_res);
}

/// Monte Carlo sweep: per m, the mean over draws of the per-draw average
/// error. Draw k at budget m uses the stream stream_seed(seed, m, k).
inline ExperimentReport run_mc_sweep(const MonteCarloAlgorithm& mc, const std::vector<std::uint64_t>& m_list,
                                     const AdversarialFamily& base, std::size_t draws, std::uint64_t seed,
                                     std::size_t grid_res = 9) {
  detail::check_m_list(m_list);
  require(draws >= 30, "draws >= 30", "Monte Carlo sweeps need at least 30 draws");
  ExperimentReport rep;
  rep.label = mc.label;
  rep.d = base.d;
  rep.alpha = base.alpha;
  rep.gamma = base.gamma;
  rep.kappa1 = base.kappa1;
  rep.kappa1_log2 = base.kappa1_log2;
  rep.kappa1_override = base.kappa1_override;
  rep.grid_res = grid_res;
  rep.seed = seed;
  rep.draws = draws;
  for (std::uint64_t m : m_list) {
    const AdversarialFamily fam = rescale_family(base, m);
    ExperimentRow row = detail::make_row(fam, m);
    double sum = 0.0, sum_c = 0.0, sum_n = 0.0, sum_n2 = 0.0;
    std::size_t min_unseen = fam.centre_count();
    for (std::size_t k = 0; k < draws; ++k) {
      const SamplingAlgorithm alg = mc.generate(stream_seed(seed, m, k), m, base.d);
      const AverageError err = average_error(fam, alg, grid_res);
      sum += err.refined;
      sum_c += err.centre_only;
      const double n = static_cast<double>(alg.sample_count());
      sum_n += n;
      sum_n2 += n * n;
      min_unseen = std::min(min_unseen, err.unseen);
    }
    const double D = static_cast<double>(draws);
    row.measured = sum / D;
    row.measured_centre = sum_c / D;
    row.unseen = min_unseen;
    row.mean_samples = sum_n / D;
    const double var = std::max(0.0, sum_n2 / D - row.mean_samples * row.mean_samples);
    // 3 standard errors of the mean
    row.budget_ok = row.mean_samples <= static_cast<double>(m) + 3.0 * std::sqrt(var / D) + 1e-9;
    row.pass = row.measured >= row.lower_bound;
    rep.rows.push_back(row);
  }
  detail::finish_report(rep);
  return rep;
}

}  // namespace requ_gap
