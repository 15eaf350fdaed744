#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <map>

#include "pzbeam/spectral.hpp"

using namespace pzb;

namespace {

material_params gains(double k) {
  material_params p;
  p.k1 = p.k2 = k;
  return p;
}

spectrum labeled(const material_params& p, scheme k, int N, branch_options o = {}) {
  auto s = assemble_blocks(p, {N, p.L, k});
  auto sp = compute_spectrum(s);
  separate_branches(sp, s, o);
  return sp;
}

}  // namespace

TEST(ClosedForm, SmallestGrids) {
  auto l1 = closed_form_lambda(1, 1.0);
  EXPECT_NEAR(l1[0], 24.0 / 7 * (5 - std::sqrt(18.0)), 1e-12);
  EXPECT_NEAR(l1[1], 24.0 / 7 * (5 + std::sqrt(18.0)), 1e-12);
  EXPECT_NEAR(closed_form_lambda(2, 1.0)[1], 27.0, 1e-12);
}

TEST(ClosedForm, MatchesGeneralizedEigensolve) {
  for (int N : {1, 2, 10, 40}) {
    double h = 1.0 / (N + 1);
    Eigen::VectorXd ref = generalized_eigenvalues(stiffness_matrix(N + 1, h), mass_matrix(N + 1, scheme::fem));
    auto cf = closed_form_lambda(N, 1.0);
    for (int k = 0; k <= N; ++k) {
      EXPECT_NEAR(cf[k], ref(k), 1e-8 * ref(k));
      EXPECT_LT(cf[k] * h * h, 12.0);
    }
  }
}

TEST(Spectrum, ControlFreeMatchesClosedForm) {
  auto p = gains(0.0);
  int N = 20;
  auto sp = compute_spectrum(assemble_blocks(p, {N, 1.0, scheme::fem}));
  auto d = derive_constants(p);
  std::vector<double> want, got;
  for (double lam : closed_form_lambda(N, 1.0))
    for (double z : {d.zeta1, d.zeta2}) {
      want.push_back(z * std::sqrt(lam));
      want.push_back(-z * std::sqrt(lam));
    }
  double max_im = 0, max_re = 0;
  for (auto& e : sp.pairs) {
    got.push_back(e.lambda.imag());
    max_im = std::max(max_im, std::abs(e.lambda.imag()));
    max_re = std::max(max_re, std::abs(e.lambda.real()));
  }
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  ASSERT_EQ(want.size(), got.size());
  for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-7 * std::abs(want[i]));
  EXPECT_LE(max_re, 1e-6 * max_im);
}

TEST(Spectrum, OrderReducedTableCell) {
  auto sp = compute_spectrum(assemble_blocks(gains(1e6), {40, 1.0, scheme::orfd}));
  EXPECT_NEAR(sp.max_re(), -177.055, 5e-3 * 177.055);
}

TEST(Spectrum, LinearSplineTableCell) {
  auto sp = compute_spectrum(assemble_blocks(gains(1e6), {40, 1.0, scheme::fem}));
  EXPECT_NEAR(sp.max_re(), -13.1571, 5e-3 * 13.1571);
}

TEST(Spectrum, ConjugateClosureAndNormalization) {
  auto s = assemble_blocks(gains(1e6), {12, 1.0, scheme::fem});
  auto sp = compute_spectrum(s);
  for (auto& e : sp.pairs) {
    EXPECT_NEAR(e.vector.norm(), 1.0, 1e-12);
    Eigen::Index i;
    e.vector.cwiseAbs().maxCoeff(&i);
    EXPECT_NEAR(e.vector(i).imag(), 0.0, 1e-12);
    EXPECT_GT(e.vector(i).real(), 0.0);
    if (e.lambda.imag() == 0.0) continue;
    double best = HUGE_VAL;
    for (auto& f : sp.pairs) best = std::min(best, std::abs(f.lambda - std::conj(e.lambda)));
    EXPECT_LE(best, 1e-9 * std::abs(e.lambda));
  }
}

TEST(Spectrum, EigenvectorsSatisfyOriginalEquation) {
  material_params p = gains(0.4);
  p.rho = 2;
  p.mu = 0.5;
  p.alpha = 3;
  p.beta = 4;
  p.gamma = 0.5;
  auto s = assemble_blocks(p, {9, 1.0, scheme::orfd});
  auto sp = compute_spectrum(s);
  Eigen::MatrixXcd op = s.op().cast<cplx>();
  for (auto& e : sp.pairs) EXPECT_LT((op * e.vector - e.lambda * e.vector).norm(), 1e-10 * std::abs(e.lambda));
}

TEST(Spectrum, ControlledSpectraAreStable) {
  for (auto k : {scheme::fem, scheme::orfd}) {
    auto sp = compute_spectrum(assemble_blocks(gains(1e6), {40, 1.0, k}));
    for (auto& e : sp.pairs) EXPECT_LT(e.lambda.real(), 0.0);
  }
}

TEST(Spectrum, DriftAcrossGrids) {
  double prev = -HUGE_VAL;
  std::vector<double> orfd;
  for (int N : {40, 80, 160}) {
    double m = compute_spectrum(assemble_blocks(gains(1e6), {N, 1.0, scheme::fem})).max_re();
    EXPECT_GT(m, prev);
    prev = m;
    orfd.push_back(compute_spectrum(assemble_blocks(gains(1e6), {N, 1.0, scheme::orfd})).max_re());
  }
  auto [lo, hi] = std::minmax_element(orfd.begin(), orfd.end());
  EXPECT_LT((*hi - *lo) / std::abs(*lo), 0.02);
}

TEST(Branches, ControlFreeAnalyticAssignment) {
  for (auto k : {scheme::fem, scheme::orfd}) {
    auto p = gains(0.0);
    int N = 30;
    auto sp = labeled(p, k, N);
    auto d = derive_constants(p);
    double h = 1.0 / (N + 1);
    Eigen::VectorXd lam = generalized_eigenvalues(stiffness_matrix(N + 1, h), mass_matrix(N + 1, k));
    for (auto& e : sp.pairs) {
      double im = std::abs(e.lambda.imag()), best = HUGE_VAL;
      branch want = branch::unassigned;
      for (int i = 0; i < lam.size(); ++i)
        for (int b = 0; b < 2; ++b) {
          double dist = std::abs(im - (b == 0 ? d.zeta1 : d.zeta2) * std::sqrt(lam(i)));
          if (dist < best) {
            best = dist;
            want = b == 0 ? branch::b1 : branch::b2;
          }
        }
      EXPECT_EQ(e.br, want);
    }
  }
}

TEST(Branches, GroupSizesUnderControl) {
  auto sp = labeled(gains(1e6), scheme::fem, 80);
  std::map<std::pair<int, int>, int> count;
  for (auto& e : sp.pairs) count[{static_cast<int>(e.br), static_cast<int>(e.half)}]++;
  ASSERT_EQ(count.size(), 4u);
  for (auto& [k, v] : count) EXPECT_EQ(v, 81);
  int b1 = 0;
  for (auto& e : sp.pairs) b1 += e.br == branch::b1;
  EXPECT_EQ(b1, 162);
}

TEST(Branches, RanksAreOrderedByFrequency) {
  auto sp = labeled(gains(1e6), scheme::fem, 20);
  for (auto& a : sp.pairs)
    for (auto& b : sp.pairs)
      if (a.br == b.br && a.half == b.half && a.im_rank < b.im_rank)
        EXPECT_GE(std::abs(a.lambda.imag()), std::abs(b.lambda.imag()));
}

TEST(Branches, ZeroProbeCannotSeparate) {
  auto s = assemble_blocks(gains(1e6), {20, 1.0, scheme::fem});
  auto sp = compute_spectrum(s);
  branch_options o;
  o.epsilon_probe = 0.0;
  o.tol_abs = 1e-9;
  try {
    separate_branches(sp, s, o);
    FAIL() << "expected a separation failure";
  } catch (const error& e) {
    EXPECT_TRUE(e.code == errc::branch_imbalance || e.code == errc::ambiguous_match);
  }
}

TEST(Branches, LabelsStableUnderProbeScale) {
  auto p = gains(1e6);
  branch_options o1, o10;
  o1.epsilon_probe = 60.0;
  o10.epsilon_probe = 600.0;
  auto a = labeled(p, scheme::fem, 40, o1), b = labeled(p, scheme::fem, 40, o10);
  for (size_t i = 0; i < a.pairs.size(); ++i) EXPECT_EQ(a.pairs[i].br, b.pairs[i].br);
}

TEST(Observability, ClosedFormRatioIncreasesWithN) {
  material_params p;
  double prev = 0.0;
  for (int N : {20, 40, 80, 160}) {
    double r = observability_ratio(p, N, 1.0);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(Observability, InverseInObservationTime) {
  material_params p;
  double r1 = observability_ratio(p, 40, 1.0), r3 = observability_ratio(p, 40, 3.0);
  EXPECT_NEAR(r1 / r3, 3.0, 1e-12);
}

TEST(Observability, GoldenAndQuadratureOfModalObservation) {
  material_params p;
  EXPECT_NEAR(observability_ratio(p, 40, 1.0), 1.3719512195616293e-08, 1e-20);
  // the tip observation of a single complex mode integrates to T |lambda|^2 (rho + mu b^2) psi^2
  auto d = derive_constants(p);
  double lam = closed_form_lambda(40, 1.0).back(), b = *d.b2;
  cplx l = cplx(0.0, d.zeta2 * std::sqrt(lam));
  double psi = 0.37, T = 1.0;
  auto f = [&](double t) {
    cplx vd = l * psi * std::exp(l * t), pd = b * vd;
    return p.rho * std::norm(vd) + p.mu * std::norm(pd);
  };
  double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, T, 8, 1e-14);
  EXPECT_NEAR(q, T * std::norm(l) * (p.rho + p.mu * b * b) * psi * psi, 1e-6 * q);
}

TEST(Observability, EnergyBasedRatioStaysBounded) {
  material_params p;
  for (int N : {20, 40, 80, 160}) EXPECT_NEAR(observability_ratio_energy(p, N, 1.0), 1.0 / 6.0, 2e-3);
}
