#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <string>

#include "error.hpp"
#include "params.hpp"

namespace pzb {

enum class scheme { fem, orfd };

inline const char* scheme_name(scheme s) { return s == scheme::fem ? "fem" : "orfd"; }

struct grid_config {
  int N = 40;
  double L = 1.0;
  scheme kind = scheme::fem;

  int n() const { return N + 1; }
  double h() const { return L / (N + 1); }
  double x(int j) const { return j * h(); }
};

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// stiffness 1/h^2 tridiag(-1,2,-1) with free-end last row
inline Eigen::MatrixXd stiffness_matrix(int n, double h) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0;
    if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = -1.0;
  }
  A(n - 1, n - 1) = 1.0;
  return A / (h * h);
}

inline Eigen::MatrixXd mass_matrix(int n, scheme s) {
  double d = s == scheme::fem ? 4.0 / 6.0 : 2.0 / 4.0;
  double o = s == scheme::fem ? 1.0 / 6.0 : 1.0 / 4.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = d;
    if (i + 1 < n) M(i, i + 1) = M(i + 1, i) = o;
  }
  M(n - 1, n - 1) = d / 2.0;
  return M;
}

inline Eigen::MatrixXd boundary_selector(int n) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  B(n - 1, n - 1) = 1.0;
  return B;
}

// Second-order form  (C1 x M) q'' + (C2 x A) q + (C3 x B)/h q' = 0  with q = [v; p].
// The boundary feedback enters the weak form as a point term, so after dividing the
// mass and stiffness integrals by h it carries a 1/h factor.
struct system_operator {
  material_params params;
  grid_config grid;
  Eigen::MatrixXd A, M, B;
  Eigen::Matrix2d C1, C2, C3;

  int n() const { return grid.n(); }
  int dim() const { return 4 * grid.n(); }
  double h() const { return grid.h(); }

  Eigen::MatrixXd stiffness() const { return kron(C2, A); }
  Eigen::MatrixXd inertia() const { return kron(C1, M); }
  Eigen::MatrixXd damping() const { return kron(C3, B) / h(); }

  // first-order operator [[0, I], [AA, KK]] in original variables (v, p, v', p')
  Eigen::MatrixXd op(double probe_eps = 0.0) const {
    int m = 2 * n();
    Eigen::MatrixXd Mi = M.inverse();
    Eigen::Matrix2d C1i = C1.inverse();
    Eigen::Matrix2d P = Eigen::Vector2d(probe_eps, 0.0).asDiagonal();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    out.topRightCorner(m, m).setIdentity();
    out.bottomLeftCorner(m, m) = -kron(C1i * C2, Mi * A);
    out.bottomRightCorner(m, m) = -kron(C1i * C3, Mi * B) / h() - kron(C1i * P, Mi);
    return out;
  }
};

inline system_operator assemble_blocks(const material_params& p, const grid_config& g) {
  validate(p);
  if (g.N < 1 || !(g.L > 0.0)) throw error(errc::invalid_params, "grid needs N >= 1 and L > 0");
  system_operator s;
  s.params = p;
  s.grid = g;
  s.grid.L = p.L;
  int n = g.n();
  double h = s.grid.h();
  s.A = stiffness_matrix(n, h);
  s.M = mass_matrix(n, g.kind);
  s.B = boundary_selector(n);
  s.C1 = p.C1();
  s.C2 = p.C2();
  s.C3 = p.C3();
  return s;
}

// E = (h/2) (q'^T kinetic q' + q^T potential q)
struct gram_pair {
  Eigen::MatrixXd kinetic, potential;
};

inline gram_pair energy_gram(const system_operator& s) { return {s.inertia(), s.stiffness()}; }

inline double energy_from_gram(const system_operator& s, const gram_pair& g, const Eigen::VectorXd& x) {
  int m = 2 * s.n();
  auto q = x.head(m);
  auto qd = x.tail(m);
  return 0.5 * s.h() * (qd.dot(g.kinetic * qd) + q.dot(g.potential * q));
}

// FEM energy as displayed with first differences Z_h and the h/12 tip correction.
// Kept for comparison only: it is not invariant under the k1 = k2 = 0 flow.
inline double fem_energy_display(const system_operator& s, const Eigen::VectorXd& x) {
  int n = s.n(), m = 2 * n;
  double h = s.h();
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Z(i, i) = -1.0;
    if (i + 1 < n) Z(i, i + 1) = 1.0;
  }
  Z /= h;
  Eigen::VectorXd q = x.head(m), qd = x.tail(m);
  Eigen::VectorXd zq = kron(Eigen::Matrix2d::Identity(), Z) * q;
  double e = 0.5 * h * (qd.dot(s.inertia() * qd) + (kron(s.C2, Z) * q).dot(zq));
  Eigen::Vector2d tip(q(n - 1), q(m - 1)), tipd(qd(n - 1), qd(m - 1));
  e += h / 12.0 * (tipd.dot(s.C1 * tipd) + 6.0 * tip.dot(s.C2 * tip));
  return e;
}

// Energy-norm similarity: y = [R q; S q'] with C2 x A = R^T R and C1 x M = S^T S.
// In y the energy is (h/2)|y|^2 and the operator has norm ~ max frequency instead of its square.
struct conditioned_operator {
  const system_operator* base = nullptr;
  Eigen::MatrixXd R, S;          // upper Cholesky factors (2n x 2n)
  Eigen::MatrixXd G;             // R S^-1
  Eigen::MatrixXd Sinv;          // S^-1

  int dim() const { return base->dim(); }

  // scaled operator [[0, G], [-G^T, -S^-T D S^-1]], optional probe damping diag(eps, 0) x I
  Eigen::MatrixXd op(double probe_eps = 0.0) const {
    int m = 2 * base->n();
    Eigen::MatrixXd D = base->damping();
    if (probe_eps != 0.0) {
      Eigen::Matrix2d P = Eigen::Vector2d(probe_eps, 0.0).asDiagonal();
      D += kron(P, Eigen::MatrixXd::Identity(base->n(), base->n()));
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    out.topRightCorner(m, m) = G;
    out.bottomLeftCorner(m, m) = -G.transpose();
    out.bottomRightCorner(m, m) = -Sinv.transpose() * D * Sinv;
    return out;
  }

  Eigen::VectorXd to_scaled(const Eigen::VectorXd& x) const {
    int m = 2 * base->n();
    Eigen::VectorXd y(2 * m);
    y.head(m) = R * x.head(m);
    y.tail(m) = S * x.tail(m);
    return y;
  }

  Eigen::VectorXd from_scaled(const Eigen::VectorXd& y) const {
    int m = 2 * base->n();
    Eigen::VectorXd x(2 * m);
    x.head(m) = R.triangularView<Eigen::Upper>().solve(y.head(m));
    x.tail(m) = S.triangularView<Eigen::Upper>().solve(y.tail(m));
    return x;
  }

  Eigen::VectorXcd from_scaled(const Eigen::VectorXcd& y) const {
    Eigen::VectorXcd x(y.size());
    x.real() = from_scaled(Eigen::VectorXd(y.real()));
    x.imag() = from_scaled(Eigen::VectorXd(y.imag()));
    return x;
  }
};

inline Eigen::MatrixXd upper_cholesky(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw error(errc::factorization_failure, std::string(what) + " is not positive definite");
  return llt.matrixU();
}

inline conditioned_operator conditioning_transform(const system_operator& s) {
  conditioned_operator c;
  c.base = &s;
  // Kronecker factors keep the Cholesky exact per factor instead of factoring a 1e12-spread matrix
  Eigen::MatrixXd Rc = upper_cholesky(s.C2, "C2"), Ra = upper_cholesky(s.A, "stiffness");
  Eigen::MatrixXd Sc = upper_cholesky(s.C1, "C1"), Sa = upper_cholesky(s.M, "mass");
  c.R = kron(Rc, Ra);
  c.S = kron(Sc, Sa);
  Eigen::MatrixXd Sci = Sc.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd Sai = Sa.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(s.n(), s.n()));
  c.Sinv = kron(Sci, Sai);
  c.G = kron(Rc * Sci, Ra * Sai);
  return c;
}

}  // namespace pzb
