#pragma once

#include <Eigen/Dense>
#include <vector>

#include "assembly.hpp"
#include "error.hpp"
#include "spectral.hpp"

namespace pzb {

struct filter_spec {
  int j_star = 0;
  std::vector<int> retained;
};

// drops the j_star highest-|Im| pairs of every (branch, sign_half) group
inline filter_spec build_filter(const spectrum& sp, int j_star) {
  if (j_star < 0 || j_star > sp.n()) throw error(errc::invalid_params, "j_star must lie in [0, N+1]");
  filter_spec f;
  f.j_star = j_star;
  if (j_star > 0 && !sp.labeled()) throw error(errc::unlabeled_spectrum, "filtering needs branch labels");
  for (int i = 0; i < static_cast<int>(sp.pairs.size()); ++i)
    if (j_star == 0 || sp.pairs[i].im_rank >= j_star) f.retained.push_back(i);
  return f;
}

inline double max_re_retained(const spectrum& sp, const filter_spec& f) {
  double m = -HUGE_VAL;
  for (int i : f.retained) m = std::max(m, sp.pairs[i].lambda.real());
  return m;
}

struct projection {
  Eigen::VectorXcd coeffs;  // modal coefficients on spectrum::scaled_vectors, zero outside retained
  Eigen::VectorXd x_filtered;
  double rcond = 0;
  bool ill_conditioned = false;
};

// Full-basis solve V c = y0 in energy coordinates. The basis is flagged, not rejected, past 1e12.
inline projection project_state(const spectrum& sp, const conditioned_operator& c, const filter_spec& f,
                                const Eigen::VectorXd& x0) {
  projection pr;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sp.scaled_vectors);
  pr.rcond = lu.rcond();
  pr.ill_conditioned = !(pr.rcond > 1e-12);
  Eigen::VectorXcd y0 = c.to_scaled(x0).cast<cplx>();
  Eigen::VectorXcd full = lu.solve(y0);
  pr.coeffs = Eigen::VectorXcd::Zero(full.size());
  for (int i : f.retained) pr.coeffs(i) = full(i);
  Eigen::VectorXd y = (sp.scaled_vectors * pr.coeffs).real();
  pr.x_filtered = c.from_scaled(y);
  return pr;
}

}  // namespace pzb
