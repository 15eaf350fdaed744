#include <gtest/gtest.h>

#include <map>
#include <random>

#include "pzbeam/filtering.hpp"

using namespace pzb;

namespace {

struct fixture {
  system_operator s;
  conditioned_operator c;
  spectrum sp;
};

fixture make(int N) {
  material_params p;
  fixture f{assemble_blocks(p, {N, 1.0, scheme::fem}), {}, {}};
  f.c = conditioning_transform(f.s);
  f.sp = compute_spectrum(f.s);
  separate_branches(f.sp, f.s);
  return f;
}

}  // namespace

TEST(Filter, RetainedCounts) {
  auto f = make(20);
  EXPECT_EQ(build_filter(f.sp, 0).retained.size(), 84u);
  EXPECT_TRUE(build_filter(f.sp, 21).retained.empty());
  auto g = make(80);
  EXPECT_EQ(build_filter(g.sp, 10).retained.size(), 284u);
}

TEST(Filter, ExcludesTopFrequenciesPerGroup) {
  auto f = make(20);
  int j = 4;
  auto flt = build_filter(f.sp, j);
  std::vector<char> kept(f.sp.pairs.size(), 0);
  for (int i : flt.retained) kept[i] = 1;
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(f.sp.pairs.size()); ++i)
    groups[{static_cast<int>(f.sp.pairs[i].br), static_cast<int>(f.sp.pairs[i].half)}].push_back(i);
  for (auto& [k, g] : groups) {
    std::sort(g.begin(), g.end(), [&](int a, int b) {
      return std::abs(f.sp.pairs[a].lambda.imag()) > std::abs(f.sp.pairs[b].lambda.imag());
    });
    for (int r = 0; r < static_cast<int>(g.size()); ++r) EXPECT_EQ(kept[g[r]], r >= j);
  }
  // conjugate closure
  for (int i : flt.retained) {
    cplx l = f.sp.pairs[i].lambda;
    bool found = false;
    for (int k : flt.retained) found |= std::abs(f.sp.pairs[k].lambda - std::conj(l)) <= 1e-9 * std::abs(l);
    EXPECT_TRUE(found);
  }
}

TEST(Filter, UnlabeledSpectrumRejected) {
  material_params p;
  auto sp = compute_spectrum(assemble_blocks(p, {10, 1.0, scheme::fem}));
  EXPECT_NO_THROW(build_filter(sp, 0));
  try {
    build_filter(sp, 2);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code, errc::unlabeled_spectrum);
  }
}

TEST(Projection, FixesRetainedAndAnnihilatesFilteredModes) {
  auto f = make(20);
  auto flt = build_filter(f.sp, 3);
  std::vector<char> kept(f.sp.pairs.size(), 0);
  for (int i : flt.retained) kept[i] = 1;
  int checked_in = 0, checked_out = 0;
  for (int i = 0; i < static_cast<int>(f.sp.pairs.size()) && (checked_in < 5 || checked_out < 5); ++i) {
    // real mode from the pair (i, conj i), built in energy coordinates
    Eigen::VectorXd y = f.sp.scaled_vectors.col(i).real();
    Eigen::VectorXd x0 = f.c.from_scaled(y);
    auto pr = project_state(f.sp, f.c, flt, x0);
    Eigen::VectorXd yf = f.c.to_scaled(pr.x_filtered);
    if (kept[i] ? checked_in == 5 : checked_out == 5) continue;
    if (kept[i]) {
      EXPECT_LT((yf - y).norm(), 1e-9 * y.norm());
      ++checked_in;
    } else {
      EXPECT_LT(yf.norm(), 1e-9 * y.norm());
      ++checked_out;
    }
  }
  EXPECT_EQ(checked_in, 5);
  EXPECT_EQ(checked_out, 5);
}

TEST(Projection, RoundTripIdempotentAndReal) {
  auto f = make(20);
  std::mt19937 rng(17);
  std::normal_distribution<double> g;
  Eigen::VectorXd y(f.s.dim());
  for (auto& v : y) v = g(rng);
  Eigen::VectorXd x0 = f.c.from_scaled(y);
  auto full = project_state(f.sp, f.c, build_filter(f.sp, 0), x0);
  EXPECT_FALSE(full.ill_conditioned);
  EXPECT_LT((f.c.to_scaled(full.x_filtered) - y).norm(), 1e-8 * y.norm());

  auto flt = build_filter(f.sp, 5);
  auto once = project_state(f.sp, f.c, flt, x0);
  auto twice = project_state(f.sp, f.c, flt, once.x_filtered);
  Eigen::VectorXd y1 = f.c.to_scaled(once.x_filtered), y2 = f.c.to_scaled(twice.x_filtered);
  EXPECT_LT((y2 - y1).norm(), 1e-8 * y1.norm());
  Eigen::VectorXcd recon = f.sp.scaled_vectors * once.coeffs;
  EXPECT_LT(recon.imag().norm(), 1e-9 * recon.norm());
  std::vector<char> kept(f.sp.pairs.size(), 0);
  for (int i : flt.retained) kept[i] = 1;
  for (int i = 0; i < once.coeffs.size(); ++i)
    if (!kept[i]) EXPECT_EQ(once.coeffs(i), cplx(0.0));
}
