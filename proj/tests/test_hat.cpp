#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "requ_gap/requ_gap.hpp"

using namespace requ_gap;

TEST(Lambda, ClosedForm) {
  EXPECT_EQ(lambda_p(1.0, 0.0, 2, 0.0), 1.0);
  EXPECT_EQ(lambda_p(1.0, 0.0, 2, 1.0), 0.0);
  EXPECT_EQ(lambda_p(1.0, 0.0, 2, -1.0), 0.0);
  EXPECT_EQ(lambda_p(2.0, 0.0, 2, 0.25), 0.5625);
  EXPECT_EQ(lambda_p(BumpSpec(2.0, {0.0}), 0.25), 0.5625);
  // p = 1 is the hat, p = 3 the cubic bump
  EXPECT_DOUBLE_EQ(lambda_p(1.0, 0.0, 1, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(lambda_p(2.0, 0.0, 3, -0.25), std::pow(1.0 - 0.125, 3));
}

TEST(Lambda, SymmetricAndContinuous) {
  for (double M : {1.0, 2.5, 4.0}) {
    for (int k = -200; k <= 200; ++k) {
      const double t = k / 100.0 / M;
      EXPECT_NEAR(lambda_p(M, 0.3, 2, 0.3 + t), lambda_p(M, 0.3, 2, 0.3 - t), 1e-14);
      EXPECT_NEAR(lambda_p(M, 0.3, 2, 0.3 + t), oracle::lambda2(M, 0.3, 0.3 + t), 1e-15);
    }
  }
}

TEST(Theta, Values) {
  EXPECT_EQ(theta_step(0.0), 0.0);
  EXPECT_EQ(theta_step(1.0), 1.0);
  EXPECT_EQ(theta_step(-3.0), 0.0);
  EXPECT_EQ(theta_step(7.0), 1.0);
  EXPECT_EQ(theta_step(0.5), 0.5);
  const double x = 1.0 - 4.0 / (3.0 * std::sqrt(3.0));
  EXPECT_NEAR(theta_step(x), 2.0 / 81.0 * std::pow(9.0 - 4.0 * std::sqrt(3.0), 2), 1e-15);
  EXPECT_NEAR(theta_floor_constant(), 0.105984, 1e-6);
  double prev = 0.0;
  for (int k = -100; k <= 300; ++k) {
    const double v = theta_step(k / 200.0);
    EXPECT_GE(v, prev - 1e-15);
    EXPECT_NEAR(v, oracle::ramp(k / 200.0), 1e-15);
    prev = v;
  }
}

TEST(Vartheta, Examples) {
  const BumpSpec s(1.0, {0.5, 0.5});
  std::vector<double> x{0.5, 0.5};
  EXPECT_EQ(vartheta(s, x), 1.0);
  x = {1.5, 0.5};
  EXPECT_EQ(vartheta(s, x), 0.0);
  x = {0.75, 0.75};
  // lambda = (1 - 1/16)^2 = 0.87890625, Delta = 0.7578125
  EXPECT_EQ(delta(s, x), 0.7578125);
  EXPECT_GE(vartheta(s, x), 0.10598);
  EXPECT_NEAR(vartheta(s, x), oracle::ramp(0.7578125), 1e-15);
}

TEST(Vartheta, ExactlyZeroOutsideSupport) {
  std::mt19937_64 rng(21);
  for (std::size_t d = 1; d <= 3; ++d) {
    const double M = 2.0;
    std::vector<double> y(d, 0.4);
    const BumpSpec s(M, y);
    const auto pts = oracle::uniform_points(rng, 10000, d, -1.0, 2.0);
    std::size_t exterior = 0;
    for (const auto& x : pts) {
      if (in_support(s, x)) continue;
      ++exterior;
      ASSERT_EQ(vartheta(s, x), 0.0);
    }
    EXPECT_GT(exterior, 5000u);
  }
}

TEST(LambdaNetwork, MatchesScaledClosedForm) {
  const auto n1 = lambda_network(1.0, 0.0);
  std::vector<double> x{0.0};
  EXPECT_EQ(realize_scalar(n1, x), 1.0);
  const auto n2 = lambda_network(2.0, 0.5);
  x = {1.5};
  EXPECT_EQ(realize_scalar(n2, x), 0.0);
  const auto n3 = lambda_network(2.0, 0.0);
  x = {0.25};
  EXPECT_EQ(realize_scalar(n3, x), 0.03515625);
  for (double M : {1.0, 3.0, 8.0}) {
    const auto net = lambda_network(M, 0.2);
    for (int k = 0; k <= 4000; ++k) {
      const double t = 0.2 - 2.0 / M + 4.0 / M * k / 4000.0;
      x = {t};
      EXPECT_NEAR(realize_scalar(net, x), oracle::lambda2(M, 0.2, t) / std::pow(M, 4), 1e-12);
    }
  }
  EXPECT_THROW(lambda_network(0.5, 0.0), PreconditionError);
}

TEST(HatNetwork, SpecExamples) {
  HatBuildParams p;
  p.spec = BumpSpec(1.0, {0.5});
  const auto hat = build_hat_network(p);
  std::vector<double> x{0.5};
  EXPECT_NEAR(hat.evaluate(x), 0.25, 1e-15);
  x = {1.6};
  EXPECT_EQ(hat.evaluate(x), 0.0);
  EXPECT_LE(hat.net.weight_count(), 51u);

  p.L = 6;
  p.policy = GrowthPolicy::constant(6, 1.0);
  p.spec = BumpSpec(2.0, {0.5, 0.5});
  const auto hat6 = build_hat_network(p);
  x = {0.5, 0.5};
  EXPECT_NEAR(hat6.evaluate(x), 1.0 / 1024.0, 1e-15);
}

TEST(HatNetwork, PreconditionsAreNamed) {
  HatBuildParams p;
  p.spec = BumpSpec(1.0, {0.5});
  auto expect_constraint = [&](HatBuildParams q, const std::string& name) {
    try {
      build_hat_network(q);
      ADD_FAILURE() << "expected " << name;
    } catch (const PreconditionError& e) {
      EXPECT_EQ(e.constraint(), name);
    }
  };
  auto q = p;
  q.L = 4;
  expect_constraint(q, "L >= 5");
  q = p;
  q.L = 6;
  expect_constraint(q, "L <= l(n)");
  q = p;
  q.C = 1.1;
  expect_constraint(q, "C^8 <= c(n)");
  q = p;
  q.C = 0.5;
  expect_constraint(q, "C >= 1");
  q = p;
  q.spec = BumpSpec(0.5, {0.5});
  expect_constraint(q, "M >= 1");
  q = p;
  q.spec = BumpSpec(1.0, {1.5});
  expect_constraint(q, "y in [0,1]^d");
}

TEST(HatNetwork, InventoryAndBudget) {
  for (std::uint64_t n : {1u, 2u}) {
    for (int L : {5, 6, 7, 8}) {
      for (std::size_t d : {1u, 2u, 3u}) {
        HatBuildParams p;
        p.n = n;
        p.L = L;
        p.policy = GrowthPolicy::constant(8, 256.0);
        p.C = choose_C(256.0);
        p.spec = BumpSpec(2.0, std::vector<double>(d, 0.3));
        const auto hat = build_hat_network(p);
        const auto& inv = hat.inventory;
        const std::size_t n8 = static_cast<std::size_t>(std::pow(n, 8));
        EXPECT_EQ(inv.A1, 2 * n * d);
        EXPECT_EQ(inv.A2, 2 * n8 * d);
        EXPECT_EQ(inv.A3, 7 * n8 * d);
        EXPECT_EQ(inv.b1, 2 * n * d);
        EXPECT_EQ(inv.b2, (d == 1 ? 2 : 3) * n8 * d);
        EXPECT_EQ(inv.b3, 2u);
        EXPECT_EQ(inv.D, L == 5 ? 8u : 7u);
        EXPECT_EQ(inv.E, 2u);
        if (L >= 6) {
          EXPECT_EQ(inv.alpha, 2u);
          EXPECT_EQ(inv.A, 5u);
          EXPECT_EQ(inv.K, 6u);
          EXPECT_EQ(inv.repeats, static_cast<std::size_t>(L - 6));
        }
        EXPECT_EQ(hat.net.depth(), static_cast<std::size_t>(L));
        EXPECT_LE(static_cast<double>(hat.net.weight_count()), hat.weight_budget());
        EXPECT_LE(hat.net.max_norm(), std::pow(p.C, 8));
        const auto arch = hat.net.architecture();
        EXPECT_EQ(arch[1], 2 * n * d);
        EXPECT_EQ(arch[2], 3 * n8 * d);
        EXPECT_EQ(arch[3], 4u);
        EXPECT_EQ(arch[4], L == 5 ? 2u : 3u);
      }
    }
  }
}

TEST(HatNetwork, MatchesClosedFormAcrossConfigurations) {
  std::mt19937_64 rng(31);
  for (std::uint64_t n : {1u, 2u}) {
    for (int L : {5, 6, 7}) {
      for (double C : {1.0, 2.0}) {
        for (double M : {1.0, 4.0}) {
          for (std::size_t d : {1u, 3u}) {
            HatBuildParams p;
            p.n = n;
            p.L = L;
            p.C = C;
            p.policy = GrowthPolicy::constant(7, 256.0);
            std::vector<double> y(d);
            for (auto& v : y) v = std::uniform_real_distribution<double>(0, 1)(rng);
            p.spec = BumpSpec(M, y);
            const auto hat = build_hat_network(p);
            const double e = std::ldexp(1.0, L) - 1.0;
            const double amp = std::pow(C, e) * std::pow(static_cast<double>(n), e / 2) / (4 * std::pow(M, 8));
            EXPECT_NEAR(hat.amplitude / amp, 1.0, 1e-12);
            for (const auto& u : oracle::uniform_points(rng, 200, d, -1.0, 1.0)) {
              std::vector<double> x(d);
              for (std::size_t j = 0; j < d; ++j) x[j] = y[j] + u[j] / M;
              ASSERT_NEAR(hat.evaluate(x) / amp, oracle::bump(M, y, x), 1e-9);
            }
          }
        }
      }
    }
  }
}

TEST(HatNetwork, DoubleEvaluationCancelsForLargeAmplitudes) {
  HatBuildParams p;
  p.n = 2;
  p.L = 7;
  p.C = 2.0;
  p.policy = GrowthPolicy::constant(7, 256.0);
  p.spec = BumpSpec(1.0, {0.5});
  const auto hat = build_hat_network(p);
  const std::vector<double> x{0.5};
  EXPECT_NEAR(hat.evaluate(x) / hat.amplitude, 1.0, 1e-12);
  // plain double realization loses everything in the final subtraction
  EXPECT_GT(std::abs(realize_scalar(hat.net, x) / hat.amplitude - 1.0), 1e-3);
}

TEST(ChooseC, LargestEighthRoot) {
  EXPECT_EQ(choose_C(1.0), 1.0);
  EXPECT_EQ(choose_C(256.0), 2.0);
  for (double c : {2.0, 3.0, 10.0, 1000.0, 12345.0}) {
    const double C = choose_C(c);
    EXPECT_LE(ipow(C, 8), c);
    EXPECT_GT(ipow(std::nextafter(C, 10.0 * C), 8), c);
  }
  EXPECT_THROW(choose_C(0.5), PreconditionError);
}

TEST(UnitBall, ConstantsForConstantPolicy) {
  const auto policy = GrowthPolicy::constant(5, 1.0);
  const auto cert = unit_ball_constants(1.0, 15.0, 1, policy, {1000, 100000});
  EXPECT_EQ(cert.L, 5);
  EXPECT_EQ(cert.n0, 1u);
  EXPECT_DOUBLE_EQ(cert.C1, 1.0);
  EXPECT_DOUBLE_EQ(cert.kappa, 1.0 / (51.0 * 256.0));
  EXPECT_TRUE(cert.tail_ok);
  EXPECT_LE(cert.kappa, std::pow((16.0 + 7.0 * cert.L) * std::pow(2.0 * cert.n0, 8), -1.0) * (1 + 1e-12));
}

TEST(UnitBall, AmplitudeScaling) {
  const auto policy = GrowthPolicy::constant(5, 1.0);
  const auto g1 = scaled_unit_ball_bump(1.0, 1.0, 1.0, {0.5}, policy, {1000, 100000});
  EXPECT_DOUBLE_EQ(g1.g.amplitude, g1.cert.kappa);
  const auto g16 = scaled_unit_ball_bump(1.0, 1.0, 16.0, {0.5}, policy, {1000, 100000});
  EXPECT_NEAR(g16.g.amplitude / g1.g.amplitude, std::pow(16.0, -64.0 / 9.0), 1e-15);
  EXPECT_LE(g16.g.amplitude, 1.0);
  EXPECT_THROW(scaled_unit_ball_bump(1.0, 15.5, 1.0, {0.5}, policy), PreconditionError);
}

TEST(UnitBall, GrowingPolicyNeedsDeeperL) {
  // c(n) = n: with C = n^(1/8) the depth-5 exponent is 31 * (1/8 + 1/2) = 19.375
  const auto policy = GrowthPolicy::parametric(1.0, 0.0, 1.0, 7);
  const auto a = unit_ball_constants(1.0, 19.0, 1, policy, {20000, 100000});
  EXPECT_EQ(a.L, 5);
  const auto b = unit_ball_constants(1.0, 20.0, 1, policy, {20000, 100000});
  EXPECT_EQ(b.L, 6);
  EXPECT_TRUE(b.tail_ok);
  // C1 is the sup of n^g / (C^(2^L-1) n^((2^L-1)/2)) over the scan
  double sup = 0.0;
  for (std::uint64_t n = 1; n <= 20000; ++n) {
    const double C = choose_C(static_cast<double>(n));
    sup = std::max(sup, std::pow(n, 19.0) / (std::pow(C, 31.0) * std::pow(n, 15.5)));
  }
  EXPECT_NEAR(a.C1 / sup, 1.0, 1e-9);
}

TEST(UnitBall, CertificateVerifies) {
  const auto policy = GrowthPolicy::constant(5, 1.0);
  for (double M : {1.0, 2.0, 16.0}) {
    const auto g = scaled_unit_ball_bump(1.0, 15.0, M, {0.5}, policy, {1000, 100000});
    const auto rep = verify_unit_ball_certificate(g.g, g.cert, policy, 1u << 20);
    EXPECT_TRUE(rep.branch1_pass);
    EXPECT_TRUE(rep.branch2_checked);
    EXPECT_TRUE(rep.branch2_materialized);
    EXPECT_TRUE(rep.branch2_pass) << (rep.violations.empty() ? "" : rep.violations.front());
    EXPECT_LE(rep.hat_scale, 4.0);
  }
}

TEST(UnitBall, ScaledUpBumpFailsBranchOne) {
  const auto policy = GrowthPolicy::constant(5, 1.0);
  // just above M = 1 the ceiling doubles n, so t^alpha ||g|| nearly reaches 1
  const double M = std::pow(1.01, 23.0 / 8.0);
  auto g = scaled_unit_ball_bump(1.0, 15.0, M, {0.5}, policy, {1000, 100000});
  EXPECT_EQ(g.cert.n, 2u);
  g.g.amplitude *= 10.0;
  const auto rep = verify_unit_ball_certificate(g.g, g.cert, policy, 1u << 20);
  EXPECT_FALSE(rep.branch1_pass);
  ASSERT_TRUE(rep.branch1_first_failure.has_value());
  const double t = static_cast<double>(*rep.branch1_first_failure);
  EXPECT_GT(t * g.g.amplitude, 1.0);
  EXPECT_LE((t - 1) * g.g.amplitude, 1.0);
}

TEST(UnitBall, ShortRangeChecksOnlyBranchOne) {
  const auto policy = GrowthPolicy::constant(5, 1.0);
  const auto g = scaled_unit_ball_bump(1.0, 15.0, 1.0, {0.5}, policy, {1000, 100000});
  const auto rep = verify_unit_ball_certificate(g.g, g.cert, policy, 10);
  EXPECT_TRUE(rep.branch1_pass);
  EXPECT_FALSE(rep.branch2_checked);
}

TEST(Vartheta, LpNormBelowSupportVolume) {
  for (std::size_t d : {1u, 2u}) {
    for (double M : {1.0, 4.0}) {
      const std::vector<double> y(d, 0.5);
      const double k = d == 1 ? 4000 : 400;
      for (double p : {1.0, 2.0}) {
        const double norm = std::pow(oracle::bump_lp_power(M, y, p, k), 1.0 / p);
        EXPECT_LE(norm, std::pow(2.0 / M, d / p) * 1.02);
        EXPECT_GT(norm, 0.0);
      }
      EXPECT_LE(vartheta(BumpSpec(M, y), y), 1.0);
    }
  }
}

TEST(Vartheta, FloorOnInnerCube) {
  std::mt19937_64 rng(8);
  for (std::size_t d : {1u, 2u, 3u}) {
    for (double M : {1.0, 3.0}) {
      const std::vector<double> y(d, 0.5);
      const BumpSpec s(M, y);
      const double T = 1.0 / (2.0 * d * M);
      for (const auto& u : oracle::uniform_points(rng, 2000, d, -T, T)) {
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = y[j] + u[j];
        ASSERT_GE(vartheta(s, x), 0.10598);
      }
      std::vector<double> corner(d);
      for (std::size_t j = 0; j < d; ++j) corner[j] = y[j] + T;
      EXPECT_GE(vartheta(s, corner), theta_floor_constant() - 1e-15);
    }
  }
}

TEST(Lambda, LipschitzConstantAttained) {
  for (double M : {1.0, 2.0, 4.0}) {
    const double bound = lambda2_lipschitz(M);
    EXPECT_NEAR(bound, 8.0 * M / (3.0 * std::sqrt(3.0)), 1e-15);
    double slope = 0.0;
    const int steps = 200000;
    const double h = 2.0 / M / steps;
    for (int k = 0; k < steps; ++k) {
      const double a = 0.5 - 1.0 / M + k * h;
      slope = std::max(slope, std::abs(lambda_p(M, 0.5, 2, a + h) - lambda_p(M, 0.5, 2, a)) / h);
    }
    EXPECT_LE(slope, bound + 1e-6);
    EXPECT_GE(slope, 0.95 * bound);
  }
}
