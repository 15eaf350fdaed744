#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "error.hpp"

namespace pzb {

struct material_params {
  double rho = 6000.0;
  double mu = 1e-6;
  double alpha = 1e9;
  double beta = 1e12;
  double gamma = 1e-3;
  double L = 1.0;
  double k1 = 1e6;
  double k2 = 1e6;

  double alpha1() const { return alpha - gamma * gamma * beta; }

  Eigen::Matrix2d C1() const { return Eigen::Vector2d(rho, mu).asDiagonal(); }
  Eigen::Matrix2d C2() const {
    Eigen::Matrix2d c;
    c << alpha, -gamma * beta, -gamma * beta, beta;
    return c;
  }
  Eigen::Matrix2d C3() const { return Eigen::Vector2d(k1, k2).asDiagonal(); }
};

inline void validate(const material_params& p) {
  auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!pos(p.rho) || !pos(p.mu) || !pos(p.alpha) || !pos(p.beta) || !pos(p.L))
    throw error(errc::invalid_params, "rho, mu, alpha, beta, L must be positive and finite");
  if (!std::isfinite(p.gamma)) throw error(errc::invalid_params, "gamma must be finite");
  if (!(p.k1 >= 0.0) || !(p.k2 >= 0.0) || !std::isfinite(p.k1) || !std::isfinite(p.k2))
    throw error(errc::invalid_params, "k1, k2 must be nonnegative");
  if (!(p.alpha1() > 0.0)) throw error(errc::non_positive_alpha1, "alpha - gamma^2 beta <= 0");
}

struct derived_constants {
  double alpha1 = 0;
  double zeta1 = 0, zeta2 = 0;
  // absent when gamma == 0 (eigenvectors of C1^-1 C2 are then the unit axes)
  std::optional<double> b1, b2;
  double eta = 0;
  double sigma_max = 0;
};

// group slowness of the coupled system
inline double eta_of(const material_params& p) {
  double a1 = p.alpha1();
  double c = std::sqrt(p.mu * p.gamma * p.gamma / a1);
  return std::max(std::sqrt(p.rho / a1) + c, std::sqrt(p.mu / p.beta) + c);
}

inline derived_constants derive_constants(const material_params& p) {
  validate(p);
  derived_constants d;
  d.alpha1 = p.alpha1();

  // eigenvalues of C1^-1 C2 are zeta^2; the matrix is similar to a symmetric one.
  // The small eigenvalue is recovered from the determinant since the trace is dominated by
  // the large one and a direct solve loses most of its digits.
  Eigen::Matrix2d Ci = p.C1().inverse() * p.C2();
  Eigen::Vector2d sq = p.C1().diagonal().cwiseSqrt();
  Eigen::Matrix2d s = sq.asDiagonal() * Ci * sq.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s, Eigen::EigenvaluesOnly);
  double det = p.beta * d.alpha1 / (p.rho * p.mu);
  double tr = p.alpha / p.rho + p.beta / p.mu;
  double z1sq = es.eigenvalues()(1);
  double z2sq = det / z1sq;
  if (!(z2sq > 0.0)) throw error(errc::factorization_failure, "C1^-1 C2 not positive definite");
  if (std::abs(z1sq + z2sq - tr) > 1e-10 * tr)
    throw error(errc::factorization_failure, "trace identity violated for C1^-1 C2");
  d.zeta1 = std::sqrt(z1sq);
  d.zeta2 = std::sqrt(z2sq);

  if (p.gamma != 0.0) {
    // eigenvector [1, b]; each b is taken from the row that does not cancel
    d.b1 = (p.alpha - p.rho * z1sq) / (p.gamma * p.beta);
    d.b2 = p.gamma * p.beta / (p.beta - p.mu * z2sq);
  }
  d.eta = eta_of(p);
  d.sigma_max = 1.0 / (4.0 * d.eta * p.L);
  return d;
}

struct lyapunov_params {
  double delta = 0, sigma = 0, M_amp = 0;
  double f1 = 0, f2 = 0, inv_eta = 0;
};

inline lyapunov_params lyapunov_from_delta(const material_params& p, double delta) {
  double eta = eta_of(p);
  double q = delta * p.L * eta;
  lyapunov_params r;
  r.delta = delta;
  r.sigma = delta * (1.0 - q);
  r.M_amp = (1.0 + q) / (1.0 - q);
  r.inv_eta = 1.0 / eta;
  return r;
}

// continuous-model rate with an epsilon weight on the second controller term
inline lyapunov_params lyapunov_rate(const material_params& p, double epsilon) {
  validate(p);
  if (p.k1 == 0.0 || p.k2 == 0.0) throw error(errc::zero_gain, "both feedback gains must be positive");
  if (!(epsilon > 0.0)) throw error(errc::invalid_params, "epsilon must be positive");
  double a1 = p.alpha1(), g2b = p.gamma * p.gamma * p.beta;
  double f1 = 2.0 * p.k1 * a1 / (p.rho * a1 + (1.0 + epsilon) * p.k1 * p.k1);
  double f2 = 2.0 * p.k2 * epsilon * a1 * p.beta /
              (epsilon * p.mu * a1 * p.beta + (epsilon * p.alpha + g2b) * p.k2 * p.k2);
  double inv_eta = 1.0 / eta_of(p);
  auto r = lyapunov_from_delta(p, std::min({inv_eta, f1, f2}) / p.L);
  r.f1 = f1;
  r.f2 = f2;
  return r;
}

// upper bound on delta for the order-reduced finite difference scheme
inline lyapunov_params orfd_delta_cap(const material_params& p) {
  validate(p);
  if (p.k1 == 0.0 || p.k2 == 0.0) throw error(errc::zero_gain, "both feedback gains must be positive");
  double a1 = p.alpha1(), g2b = p.gamma * p.gamma * p.beta;
  double f1 = 2.0 * p.k1 * a1 / (a1 * p.rho + p.k1 * p.k1);
  double f2 = 4.0 * p.k2 * p.beta * a1 / (2.0 * a1 * p.beta * p.mu + (p.alpha + g2b) * p.k2 * p.k2);
  double inv_eta = 1.0 / eta_of(p);
  auto r = lyapunov_from_delta(p, std::min({inv_eta, f1, f2}) / (2.0 * p.L));
  r.f1 = f1;
  r.f2 = f2;
  return r;
}

}  // namespace pzb
