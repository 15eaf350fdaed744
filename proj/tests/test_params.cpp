#include <gtest/gtest.h>

#include <random>

#include "pzbeam/params.hpp"

using namespace pzb;

namespace {

material_params table2() { return material_params{}; }

}  // namespace

TEST(Params, SigmaMaxMatchesPublishedValue) {
  auto d = derive_constants(table2());
  EXPECT_NEAR(d.sigma_max, 102.04, 0.1);
  EXPECT_DOUBLE_EQ(d.sigma_max, 1.0 / (4.0 * d.eta * 1.0));
}

TEST(Params, EtaFromGroupSlowness) {
  auto p = table2();
  double a1 = 1e9 - 1e-6 * 1e12;
  double c = std::sqrt(1e-6 * 1e-6 / a1);
  double eta = std::max(std::sqrt(6000.0 / a1) + c, std::sqrt(1e-6 / 1e12) + c);
  EXPECT_NEAR(derive_constants(p).eta, eta, 1e-15);
  EXPECT_NEAR(eta, 2.4508e-3, 1e-7);
}

TEST(Params, WaveSpeedsAgainstExtendedPrecisionRoots) {
  auto d = derive_constants(table2());
  // roots of z^2 - tr z + det in long double
  long double tr = 1e9L / 6000.0L + 1e12L / 1e-6L, det = 1e12L * (1e9L - 1e6L) / (6000.0L * 1e-6L);
  long double z1 = (tr + std::sqrt(tr * tr - 4 * det)) / 2, z2 = det / z1;
  EXPECT_NEAR(d.zeta1, std::sqrt(static_cast<double>(z1)), 1e-6);
  EXPECT_NEAR(d.zeta2, std::sqrt(static_cast<double>(z2)), 1e-9);
  EXPECT_NEAR(d.zeta2, 408.04411526206327, 1e-9);
  EXPECT_GE(d.zeta1, d.zeta2);
}

TEST(Params, CouplingRatiosSatisfyQuadratic) {
  auto p = table2();
  auto d = derive_constants(p);
  ASSERT_TRUE(d.b1 && d.b2);
  EXPECT_NEAR(*d.b1 * *d.b2, -p.rho / p.mu, 1e-10 * p.rho / p.mu);
  double s = p.alpha / (p.gamma * p.beta) - p.rho / (p.gamma * p.mu);
  for (double b : {*d.b1, *d.b2}) {
    double scale = std::max({b * b, std::abs(s * b), p.rho / p.mu});
    EXPECT_LT(std::abs(b * b - s * b - p.rho / p.mu) / scale, 1e-8);
  }
  EXPECT_NEAR(*d.b2, 1e-3, 1e-12);
}

TEST(Params, Errors) {
  auto p = table2();
  p.gamma = 1.0;  // alpha - gamma^2 beta < 0
  EXPECT_THROW(
      {
        try {
          derive_constants(p);
        } catch (const error& e) {
          EXPECT_EQ(e.code, errc::non_positive_alpha1);
          throw;
        }
      },
      error);
  p = table2();
  p.gamma = 0.0;
  auto d = derive_constants(p);
  EXPECT_FALSE(d.b1.has_value());
  EXPECT_FALSE(d.b2.has_value());
  p = table2();
  p.rho = -1;
  EXPECT_THROW(derive_constants(p), error);
}

TEST(Params, LyapunovRateAtTable2Gains) {
  auto p = table2();
  double a1 = p.alpha1();
  double f1 = 2e6 * a1 / (6000.0 * a1 + 2.0 * 1e12);
  auto l = lyapunov_rate(p, 1.0);
  EXPECT_NEAR(l.delta, f1, 1e-9);
  EXPECT_NEAR(l.delta, 249.9, 0.1);
  double q = l.delta * derive_constants(p).eta;
  EXPECT_NEAR(q, 0.6125, 1e-3);
  EXPECT_NEAR(l.sigma, 96.8, 0.1);
  EXPECT_NEAR(l.M_amp, (1 + q) / (1 - q), 1e-12);
}

TEST(Params, OptimalDeltaGivesSigmaMax) {
  auto p = table2();
  auto d = derive_constants(p);
  auto l = lyapunov_from_delta(p, 1.0 / (2.0 * d.eta * p.L));
  EXPECT_NEAR(l.sigma, d.sigma_max, 1e-12 * d.sigma_max);
}

TEST(Params, SmallGainGivesSmallRate) {
  auto p = table2();
  p.k1 = 1e-6;
  auto l = lyapunov_rate(p, 1.0);
  EXPECT_LT(l.delta, 1e-8);
  EXPECT_LT(l.sigma, 1e-8);
  p.k1 = 0.0;
  EXPECT_THROW(lyapunov_rate(p, 1.0), error);
}

TEST(Params, OrfdCapValue) {
  auto p = table2();
  double a1 = p.alpha1();
  double f1 = 2e6 * a1 / (a1 * 6000.0 + 1e12);
  auto c = orfd_delta_cap(p);
  EXPECT_NEAR(c.delta, f1 / 2.0, 1e-9);
}

TEST(Params, RateInvariantsOverRandomParameters) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    material_params p;
    p.rho = std::pow(10.0, u(rng));
    p.mu = std::pow(10.0, u(rng));
    p.alpha = std::pow(10.0, u(rng) + 2);
    p.beta = std::pow(10.0, u(rng));
    p.gamma = 0.1 * u(rng) * std::sqrt(p.alpha / p.beta);
    p.L = std::pow(10.0, 0.5 * u(rng));
    p.k1 = std::pow(10.0, u(rng));
    p.k2 = std::pow(10.0, u(rng));
    auto d = derive_constants(p);
    auto l = lyapunov_rate(p, 1.0);
    double q = l.delta * p.L * d.eta;
    EXPECT_GT(q, 0.0);
    EXPECT_LE(q, 1.0 + 1e-12);
    // when 1/eta binds, the equivalence constant degenerates and the guaranteed rate is zero
    if (q < 1.0 - 1e-12) {
      EXPECT_GT(l.M_amp, 1.0);
      EXPECT_GT(l.sigma, 0.0);
    } else {
      EXPECT_NEAR(l.sigma, 0.0, 1e-9 * l.delta);
    }
    auto p2 = p;
    p2.k1 *= 3.7;
    p2.k2 *= 3.7;
    EXPECT_EQ(derive_constants(p2).sigma_max, d.sigma_max);
    auto d2 = derive_constants(p);
    EXPECT_EQ(d2.zeta1, d.zeta1);
    EXPECT_EQ(d2.zeta2, d.zeta2);
  }
}
