#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "error.hpp"
#include "filtering.hpp"
#include "spectral.hpp"

namespace pzb {

// state layout: v_1..v_{N+1}, p_1..p_{N+1}, v'_1.., p'_1..; the clamped node is not stored

inline Eigen::VectorXd initial_state_standard(const grid_config& g) {
  int n = g.n();
  Eigen::VectorXd f(n);
  for (int j = 1; j <= n; ++j) {
    double x = g.x(j), s = 0.0;
    for (int k = 41; k <= 81; ++k) s += x * std::sin(k * M_PI * x);
    f(j - 1) = 1e-2 * s;
  }
  Eigen::VectorXd x(4 * n);
  for (int b = 0; b < 4; ++b) x.segment(b * n, n) = f;
  return x;
}

// real part of eigenvector i, scaled to unit energy
inline Eigen::VectorXd initial_state_eigenmode(const spectrum& sp, const conditioned_operator& c, int i) {
  if (i < 0 || i >= static_cast<int>(sp.pairs.size())) throw error(errc::invalid_params, "eigenmode index out of range");
  Eigen::VectorXd y = sp.scaled_vectors.col(i).real();
  double e = 0.5 * c.base->h() * y.squaredNorm();
  if (!(e > 0.0)) throw error(errc::invalid_params, "eigenmode has zero real part");
  return c.from_scaled(Eigen::VectorXd(y / std::sqrt(e)));
}

// CSV with columns v,p,vt,pt for nodes 1..N+1, optional header line
inline Eigen::VectorXd initial_state_file(const std::string& path, const grid_config& g) {
  std::ifstream in(path);
  if (!in) throw error(errc::file_format, "cannot open " + path);
  int n = g.n();
  Eigen::VectorXd x(4 * n);
  std::string line;
  int row = 0, lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (row == 0 && line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos &&
        line.find_first_of("0123456789") == std::string::npos)
      continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= 4 || row >= n) throw error(errc::file_format, path + ":" + std::to_string(lineno) + " too many values");
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos || !std::isfinite(v)) throw std::invalid_argument(cell);
        x(col * n + row) = v;
      } catch (const std::exception&) {
        throw error(errc::file_format, path + ":" + std::to_string(lineno) + " bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != 4) throw error(errc::file_format, path + ":" + std::to_string(lineno) + " expected 4 columns");
    ++row;
  }
  if (row != n) throw error(errc::file_format, path + ": expected " + std::to_string(n) + " rows, got " + std::to_string(row));
  return x;
}

// y(t) in energy coordinates; exp is evaluated per mode so any t is safe
inline Eigen::VectorXd modal_propagate_scaled(const spectrum& sp, const Eigen::VectorXcd& coeffs, double t) {
  Eigen::VectorXcd w(coeffs.size());
  for (int i = 0; i < coeffs.size(); ++i) w(i) = coeffs(i) == cplx(0.0) ? cplx(0.0) : coeffs(i) * std::exp(sp.pairs[i].lambda * t);
  return (sp.scaled_vectors * w).real();
}

inline Eigen::VectorXd modal_propagate(const spectrum& sp, const conditioned_operator& c, const Eigen::VectorXcd& coeffs,
                                       double t) {
  return c.from_scaled(modal_propagate_scaled(sp, coeffs, t));
}

inline double energy_scaled(const system_operator& s, const Eigen::VectorXd& y) { return 0.5 * s.h() * y.squaredNorm(); }

inline double energy(const system_operator& s, const Eigen::VectorXd& x) {
  if (x.size() != s.dim()) throw error(errc::invalid_params, "state dimension mismatch");
  return energy_from_gram(s, energy_gram(s), x);
}

inline double boundary_dissipation(const system_operator& s, const Eigen::VectorXd& x) {
  int n = s.n();
  double vd = x(2 * n + n - 1), pd = x(3 * n + n - 1);
  return s.params.k1 * vd * vd + s.params.k2 * pd * pd;
}

// midpoint quantities u = delta_x v and w = average of v' on the N+1 cells
struct midpoint_fields {
  Eigen::VectorXd u1, u2, w1, w2;
};

inline midpoint_fields midpoints(const system_operator& s, const Eigen::VectorXd& x) {
  int n = s.n();
  double h = s.h();
  midpoint_fields m{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  auto node = [&](int blk, int j) { return j == 0 ? 0.0 : x(blk * n + j - 1); };
  for (int j = 0; j < n; ++j) {
    m.u1(j) = (node(0, j + 1) - node(0, j)) / h;
    m.u2(j) = (node(1, j + 1) - node(1, j)) / h;
    m.w1(j) = 0.5 * (node(2, j + 1) + node(2, j));
    m.w2(j) = 0.5 * (node(3, j + 1) + node(3, j));
  }
  return m;
}

// cell-sum form of the order-reduced energy
inline double orfd_midpoint_energy(const system_operator& s, const Eigen::VectorXd& x) {
  if (s.grid.kind != scheme::orfd) throw error(errc::scheme_mismatch, "midpoint energy is defined for the orfd scheme");
  auto m = midpoints(s, x);
  const auto& p = s.params;
  double a1 = p.alpha1();
  Eigen::ArrayXd c = p.gamma * m.u1.array() - m.u2.array();
  double sum = (p.rho * m.w1.array().square() + p.mu * m.w2.array().square() + a1 * m.u1.array().square() +
                p.beta * c.square()).sum();
  return 0.5 * s.h() * sum;
}

struct lyapunov_value {
  double L_h = 0, phi_h = 0, E = 0;
};

inline lyapunov_value lyapunov_functional(const system_operator& s, const Eigen::VectorXd& x, double delta) {
  if (s.grid.kind != scheme::orfd) throw error(errc::scheme_mismatch, "Lyapunov functional is defined for the orfd scheme");
  auto m = midpoints(s, x);
  double h = s.h(), phi = 0.0;
  for (int j = 0; j < s.n(); ++j)
    phi += (j + 0.5) * h * (s.params.rho * m.u1(j) * m.w1(j) + s.params.mu * m.u2(j) * m.w2(j));
  phi *= h;
  lyapunov_value v;
  v.E = energy(s, x);
  v.phi_h = phi;
  v.L_h = v.E + delta * phi;
  return v;
}

// Midpoint rule on the energy-coordinate operator (same map as in original variables by similarity)
class midpoint_stepper {
 public:
  midpoint_stepper(const conditioned_operator& c, double dt) : c_(c), dt_(dt) {
    if (!(dt > 0.0)) throw error(errc::invalid_params, "dt must be positive");
    Eigen::MatrixXd op = c.op();
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(op.rows(), op.cols());
    rhs_ = I + 0.5 * dt * op;
    lu_.compute(I - 0.5 * dt * op);
    if (!(lu_.rcond() > 1e-14)) throw error(errc::singular_system, "midpoint matrix is singular");
  }
  Eigen::VectorXd step_scaled(const Eigen::VectorXd& y) const { return lu_.solve(rhs_ * y); }
  Eigen::VectorXd step(const Eigen::VectorXd& x) const { return c_.from_scaled(step_scaled(c_.to_scaled(x))); }
  double dt() const { return dt_; }

 private:
  const conditioned_operator& c_;
  double dt_;
  Eigen::MatrixXd rhs_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

inline Eigen::VectorXd implicit_midpoint_step(const conditioned_operator& c, const Eigen::VectorXd& x, double dt) {
  return midpoint_stepper(c, dt).step(x);
}

enum class ic_kind { standard, eigenmode, file };

struct initial_condition {
  ic_kind kind = ic_kind::standard;
  int index = 0;
  std::string path;
};

struct sim_config {
  material_params params;
  scheme kind = scheme::orfd;
  int N = 80;
  int j_star = 0;
  double t_final = 0.1;
  int samples = 400;
  initial_condition ic;
  branch_options branches;
  bool snapshots = false;
};

struct energy_sample {
  double t, E, dissipation;
};

struct snapshot {
  double t;
  Eigen::VectorXd v, p;
};

struct energy_trace {
  std::vector<energy_sample> samples;
  std::vector<snapshot> snapshots;
  scheme kind = scheme::orfd;
  int N = 0;
  int j_star = 0;
  double E0 = 0;        // energy of the propagated (possibly filtered) initial state
  double max_re = 0;    // spectral abscissa of the retained modes
  double rcond = 0;
  bool ill_conditioned = false;
};

inline std::vector<double> sample_times(double t_final, int samples) {
  if (t_final == 0.0) return {0.0};
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) t[i] = t_final * i / (samples - 1);
  return t;
}

inline energy_trace simulate(const sim_config& cfg) {
  if (!(cfg.t_final >= 0.0) || (cfg.t_final > 0.0 && cfg.samples < 2))
    throw error(errc::invalid_params, "need t_final >= 0 and at least 2 samples");
  auto s = assemble_blocks(cfg.params, {cfg.N, cfg.params.L, cfg.kind});
  auto c = conditioning_transform(s);
  auto sp = compute_spectrum(s);
  if (cfg.j_star > 0) separate_branches(sp, s, cfg.branches);
  auto f = build_filter(sp, cfg.j_star);

  Eigen::VectorXd x0;
  switch (cfg.ic.kind) {
    case ic_kind::standard: x0 = initial_state_standard(s.grid); break;
    case ic_kind::eigenmode: x0 = initial_state_eigenmode(sp, c, cfg.ic.index); break;
    case ic_kind::file: x0 = initial_state_file(cfg.ic.path, s.grid); break;
  }
  auto pr = project_state(sp, c, f, x0);

  energy_trace tr;
  tr.kind = cfg.kind;
  tr.N = cfg.N;
  tr.j_star = cfg.j_star;
  tr.max_re = max_re_retained(sp, f);
  tr.rcond = pr.rcond;
  tr.ill_conditioned = pr.ill_conditioned;
  for (double t : sample_times(cfg.t_final, cfg.samples)) {
    Eigen::VectorXd y = modal_propagate_scaled(sp, pr.coeffs, t);
    Eigen::VectorXd x = c.from_scaled(y);
    tr.samples.push_back({t, energy_scaled(s, y), boundary_dissipation(s, x)});
    if (cfg.snapshots) tr.snapshots.push_back({t, x.head(s.n()), x.segment(s.n(), s.n())});
  }
  tr.E0 = tr.samples.front().E;
  return tr;
}

}  // namespace pzb
