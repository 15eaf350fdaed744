#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "error.hpp"
#include "params.hpp"

namespace pzb {

using cplx = std::complex<double>;

enum class branch { b1, b2, unassigned };
enum class sign_half { plus, minus };

inline const char* branch_name(branch b) {
  return b == branch::b1 ? "1" : b == branch::b2 ? "2" : "unassigned";
}

struct eigen_pair {
  cplx lambda;
  Eigen::VectorXcd vector;  // original variables, unit norm, largest entry real positive
  branch br = branch::unassigned;
  sign_half half = sign_half::plus;
  int im_rank = -1;         // 0 = largest |Im| within its (branch, sign_half) group
};

struct branch_diagnostics {
  double epsilon_probe = 0;
  double tol = 0;
  bool relative = true;
  double calib_em_max = 0;    // largest relative probe shift on the control-free electromagnetic branch
  double calib_mech_min = 0;  // smallest relative probe shift on the control-free mechanical branch
};

struct spectrum {
  std::vector<eigen_pair> pairs;
  Eigen::MatrixXcd scaled_vectors;  // columns in energy coordinates, unit norm
  scheme kind = scheme::fem;
  int N = 0;
  double k1 = 0, k2 = 0;
  std::optional<branch_diagnostics> diag;

  int n() const { return N + 1; }
  double max_re() const {
    double m = -HUGE_VAL;
    for (auto& p : pairs) m = std::max(m, p.lambda.real());
    return m;
  }
  bool labeled() const {
    return !pairs.empty() && std::all_of(pairs.begin(), pairs.end(), [](auto& p) { return p.br != branch::unassigned; });
  }
};

// eigenvalues of M^-1 A for the linear-spline mass, ascending
inline std::vector<double> closed_form_lambda(int N, double L) {
  double h = L / (N + 1);
  std::vector<double> out(N + 1);
  for (int k = 1; k <= N + 1; ++k) {
    double th = (2.0 * k - 1.0) * M_PI * h / (2.0 * L);
    out[k - 1] = (6.0 - 6.0 * std::cos(th)) / ((2.0 + std::cos(th)) * h * h);
  }
  return out;
}

inline Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw error(errc::eigensolver_failure, "generalized symmetric eigensolve");
  return es.eigenvalues();
}

namespace detail {

inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  double nrm = v.norm();
  if (nrm == 0.0) return;
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  cplx ph = std::conj(v(imax)) / std::abs(v(imax));
  v *= ph / nrm;
}

inline std::string tag(const system_operator& s) {
  return std::string(scheme_name(s.grid.kind)) + " N=" + std::to_string(s.grid.N) +
         " k1=" + std::to_string(s.params.k1) + " k2=" + std::to_string(s.params.k2);
}

struct raw_eig {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // scaled coordinates, unit columns
};

inline raw_eig eig_scaled(const conditioned_operator& c, double probe_eps, const std::string& tag) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(c.op(probe_eps), true);
  if (es.info() != Eigen::Success) throw error(errc::eigensolver_failure, "no convergence for " + tag);
  raw_eig r{es.eigenvalues(), es.eigenvectors()};
  int d = static_cast<int>(r.values.size());
  for (int i = 0; i < d; ++i) r.vectors.col(i).normalize();
  // exact conjugate closure: Im > 0 member followed by its conjugate
  for (int i = 0; i + 1 < d; ++i) {
    if (r.values(i).imag() > 0.0) {
      r.values(i + 1) = std::conj(r.values(i));
      r.vectors.col(i + 1) = r.vectors.col(i).conjugate();
      ++i;
    } else if (r.values(i).imag() < 0.0) {
      throw error(errc::eigensolver_failure, "conjugate pairs out of order for " + tag);
    }
  }
  return r;
}

// greedy one-to-one assignment by ascending phase-aligned distance
inline std::vector<int> match_vectors(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const int d = static_cast<int>(a.cols());
  Eigen::MatrixXd dist = (2.0 - 2.0 * (a.adjoint() * b).cwiseAbs().array()).max(0.0).sqrt().matrix();
  std::vector<std::pair<double, int>> order;
  order.reserve(static_cast<size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) order.emplace_back(dist(i, j), j * d + i);
  std::sort(order.begin(), order.end());
  std::vector<int> to(d, -1);
  std::vector<char> used(d, 0);
  int left = d;
  for (auto& [dv, key] : order) {
    int i = key % d, j = key / d;
    if (to[i] >= 0 || used[j]) continue;
    // another unassigned vector equally close to the same target makes the choice arbitrary
    if (dv < 1e-3) {
      for (int i2 = 0; i2 < d; ++i2)
        if (i2 != i && to[i2] < 0 && std::abs(dist(i2, j) - dv) < 1e-8)
          throw error(errc::ambiguous_match, "two eigenvectors match one probe eigenvector");
    }
    to[i] = j;
    used[j] = 1;
    if (--left == 0) break;
  }
  return to;
}

inline std::vector<double> relative_shifts(const raw_eig& act, const raw_eig& probe, const std::vector<int>& to) {
  std::vector<double> r(act.values.size());
  for (size_t i = 0; i < r.size(); ++i)
    r[i] = std::abs(act.values(i).real() - probe.values(to[i]).real()) / std::abs(act.values(i));
  return r;
}

}  // namespace detail

inline spectrum compute_spectrum(const system_operator& s) {
  auto c = conditioning_transform(s);
  auto r = detail::eig_scaled(c, 0.0, detail::tag(s));
  spectrum sp;
  sp.kind = s.grid.kind;
  sp.N = s.grid.N;
  sp.k1 = s.params.k1;
  sp.k2 = s.params.k2;
  sp.scaled_vectors = r.vectors;
  int d = s.dim();
  sp.pairs.resize(d);
  for (int i = 0; i < d; ++i) {
    auto& p = sp.pairs[i];
    p.lambda = r.values(i);
    p.vector = c.from_scaled(Eigen::VectorXcd(r.vectors.col(i)));
    detail::fix_phase(p.vector);
    p.half = p.lambda.imag() < 0.0 ? sign_half::minus : sign_half::plus;
  }
  for (int i = 0; i + 1 < d; ++i)
    if (sp.pairs[i].lambda.imag() > 0.0) {
      sp.pairs[i + 1].vector = sp.pairs[i].vector.conjugate();
      ++i;
    }
  return sp;
}

struct branch_options {
  std::optional<double> epsilon_probe;  // default 1e-2 rho
  std::optional<double> tol_abs;        // absolute real-part test when set, relative auto test otherwise
};

// Relative threshold from the control-free system at the same grid, where the branches are
// known analytically: halfway (geometrically) between the two branches' probe responses.
inline branch_diagnostics calibrate_probe(const system_operator& s, double eps) {
  material_params p0 = s.params;
  p0.k1 = p0.k2 = 0.0;
  auto s0 = assemble_blocks(p0, s.grid);
  auto c0 = conditioning_transform(s0);
  auto act = detail::eig_scaled(c0, 0.0, detail::tag(s0));
  auto probe = detail::eig_scaled(c0, eps, detail::tag(s0) + " probe");
  auto to = detail::match_vectors(act.vectors, probe.vectors);
  auto r = detail::relative_shifts(act, probe, to);

  derived_constants dc = derive_constants(p0);
  Eigen::VectorXd mu = generalized_eigenvalues(s0.A, s0.M);
  double z_split = std::sqrt(dc.zeta2 * std::sqrt(mu.maxCoeff()) * dc.zeta1 * std::sqrt(mu.minCoeff()));

  branch_diagnostics d;
  d.epsilon_probe = eps;
  d.calib_em_max = 0.0;
  d.calib_mech_min = HUGE_VAL;
  for (int i = 0; i < act.values.size(); ++i) {
    if (std::abs(act.values(i).imag()) > z_split)
      d.calib_em_max = std::max(d.calib_em_max, r[i]);
    else
      d.calib_mech_min = std::min(d.calib_mech_min, r[i]);
  }
  if (!(d.calib_mech_min > d.calib_em_max))
    throw error(errc::branch_imbalance, "probe does not separate the control-free branches for " + detail::tag(s));
  double floor = 1e4 * std::numeric_limits<double>::epsilon();
  d.tol = std::sqrt(std::max(d.calib_em_max, floor) * d.calib_mech_min);
  d.relative = true;
  return d;
}

inline void assign_sign_halves(spectrum& sp) {
  const int n = sp.n();
  for (branch b : {branch::b1, branch::b2}) {
    std::vector<int> real_idx;
    for (int i = 0; i < static_cast<int>(sp.pairs.size()); ++i) {
      auto& p = sp.pairs[i];
      if (p.br != b) continue;
      if (p.lambda.imag() > 0.0) p.half = sign_half::plus;
      else if (p.lambda.imag() < 0.0) p.half = sign_half::minus;
      else real_idx.push_back(i);
    }
    if (real_idx.size() % 2 != 0)
      throw error(errc::branch_imbalance, "odd number of real eigenvalues in a branch");
    std::sort(real_idx.begin(), real_idx.end(),
              [&](int a, int c) { return sp.pairs[a].lambda.real() < sp.pairs[c].lambda.real(); });
    for (size_t k = 0; k < real_idx.size(); ++k)
      sp.pairs[real_idx[k]].half = k % 2 == 0 ? sign_half::plus : sign_half::minus;
  }
  for (branch b : {branch::b1, branch::b2})
    for (sign_half h : {sign_half::plus, sign_half::minus}) {
      std::vector<int> g;
      for (int i = 0; i < static_cast<int>(sp.pairs.size()); ++i)
        if (sp.pairs[i].br == b && sp.pairs[i].half == h) g.push_back(i);
      if (static_cast<int>(g.size()) != n)
        throw error(errc::branch_imbalance, "signed half has " + std::to_string(g.size()) + " pairs, expected " + std::to_string(n));
      std::sort(g.begin(), g.end(), [&](int a, int c) {
        double ia = std::abs(sp.pairs[a].lambda.imag()), ic = std::abs(sp.pairs[c].lambda.imag());
        if (ia != ic) return ia > ic;
        double ra = std::abs(sp.pairs[a].lambda.real()), rc = std::abs(sp.pairs[c].lambda.real());
        if (ra != rc) return ra > rc;
        return a < c;
      });
      for (int r = 0; r < n; ++r) sp.pairs[g[r]].im_rank = r;
    }
}

// Damped-probe labeling: the probe adds viscous damping to the first wave equation only, so
// eigenvalues that move belong to the mechanical branch (2) and the rest to branch 1.
inline void separate_branches(spectrum& sp, const system_operator& s, const branch_options& opt = {}) {
  double eps = opt.epsilon_probe.value_or(1e-2 * s.params.rho);
  branch_diagnostics d;
  if (opt.tol_abs) {
    d.epsilon_probe = eps;
    d.tol = *opt.tol_abs;
    d.relative = false;
  } else {
    d = calibrate_probe(s, eps);
  }

  auto c = conditioning_transform(s);
  auto probe = detail::eig_scaled(c, eps, detail::tag(s) + " probe");
  auto to = detail::match_vectors(sp.scaled_vectors, probe.vectors);

  const int dim = static_cast<int>(sp.pairs.size());
  for (int i = 0; i < dim; ++i) {
    auto& p = sp.pairs[i];
    double shift = std::abs(p.lambda.real() - probe.values(to[i]).real());
    double lim = d.relative ? d.tol * std::abs(p.lambda) : d.tol;
    p.br = shift < lim ? branch::b1 : branch::b2;
  }
  for (int i = 0; i + 1 < dim; ++i)
    if (sp.pairs[i].lambda.imag() > 0.0) {
      sp.pairs[i + 1].br = sp.pairs[i].br;
      ++i;
    }
  int c1 = 0;
  for (auto& p : sp.pairs) c1 += p.br == branch::b1;
  if (c1 != 2 * sp.n()) {
    for (auto& p : sp.pairs) p.br = branch::unassigned;
    throw error(errc::branch_imbalance, "branch 1 has " + std::to_string(c1) + " of " + std::to_string(dim) +
                                            " eigenpairs for " + detail::tag(s));
  }
  sp.diag = d;
  assign_sign_halves(sp);
}

// Energy-to-observation ratio of the highest mode of the control-free linear-spline model,
// evaluated with the closed-form identities for a single eigenmode.
inline double observability_ratio(const material_params& p, int N, double T, branch b = branch::b2) {
  if (!(T > 0.0)) throw error(errc::invalid_params, "T must be positive");
  auto d = derive_constants(p);
  if (!d.b1) throw error(errc::invalid_params, "observability ratio needs gamma != 0");
  double h = p.L / (N + 1);
  double lam = closed_form_lambda(N, p.L).back();
  double z2 = b == branch::b1 ? d.zeta1 * d.zeta1 : d.zeta2 * d.zeta2;
  double bk = b == branch::b1 ? *d.b1 : *d.b2;
  double a1 = d.alpha1, lh2 = lam * h * h;
  double bracket = 2.0 * p.rho * (12.0 * a1 * z2 - p.rho * lh2) / (12.0 * a1 * z2) +
                   2.0 * p.mu * bk * bk * (1.0 - p.alpha * p.mu * lh2 / (12.0 * p.beta * a1 * z2)) -
                   p.rho * p.mu * p.gamma * lh2 / (a1 * z2) * bk;
  return (2.0 * p.L - h) / (2.0 * T * (p.rho + p.mu * bk * bk) * bracket);
}

// Same ratio computed from the conserved discrete energy of the mode, E / (T |lambda|^2 C1 tip . tip)
inline double observability_ratio_energy(const material_params& p, int N, double T) {
  if (!(T > 0.0)) throw error(errc::invalid_params, "T must be positive");
  grid_config g{N, p.L, scheme::fem};
  int n = g.n();
  double h = g.h();
  Eigen::MatrixXd A = stiffness_matrix(n, h), M = mass_matrix(n, scheme::fem);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
  Eigen::VectorXd psi = es.eigenvectors().col(n - 1);
  // E = h |lambda|^2 q^H (C1 x M) q and the observation is T |lambda|^2 (rho + mu b^2) psi_tip^2;
  // the (rho + mu b^2) factor cancels
  return h * psi.dot(M * psi) / (T * psi(n - 1) * psi(n - 1));
}

}  // namespace pzb
