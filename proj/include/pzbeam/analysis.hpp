#pragma once

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "assembly.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "filtering.hpp"
#include "spectral.hpp"

namespace pzb {

inline int thread_count() {
  if (const char* s = std::getenv("PZB_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  return 1;
}

// runs f(0..count-1) on up to thread_count() workers; results must be written by index
inline void parallel_for(int count, const std::function<void(int)>& f) {
  int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) f(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct decay_fit {
  double sigma = 0, M = 0, r_squared = 0;
};

// least squares on log E = log(M E0) - sigma t with E0 the first sample of the trace
inline decay_fit fit_decay_rate(const energy_trace& tr, double t_lo, double t_hi) {
  std::vector<double> t, y;
  for (auto& s : tr.samples) {
    if (s.t < t_lo || s.t > t_hi) continue;
    if (!(s.E > 0.0)) throw error(errc::non_positive_energy, "energy sample at t=" + std::to_string(s.t) + " is not positive");
    t.push_back(s.t);
    y.push_back(std::log(s.E));
  }
  if (t.size() < 8) throw error(errc::degenerate_window, "fewer than 8 samples in the fit window");
  double e0 = tr.E0 > 0.0 ? tr.E0 : (tr.samples.empty() ? 0.0 : tr.samples.front().E);
  if (!(e0 > 0.0)) throw error(errc::non_positive_energy, "E(0) is not positive");
  int n = static_cast<int>(t.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = t[i];
    Y(i) = y[i];
  }
  Eigen::Vector2d c = X.colPivHouseholderQr().solve(Y);
  decay_fit f;
  f.sigma = -c(1);
  f.M = std::exp(c(0)) / e0;
  double mean = Y.mean();
  double ss_tot = (Y.array() - mean).square().sum(), ss_res = (Y - X * c).squaredNorm();
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

struct sweep_row {
  int N;
  int jstar;  // -1 marks an unfiltered orfd row
  double k1, k2, max_re;
};

inline std::vector<sweep_row> filter_sweep(const material_params& p, scheme kind, const std::vector<int>& N_list,
                                           const std::vector<int>& jstar_list, const branch_options& bo = {}) {
  std::vector<std::vector<sweep_row>> parts(N_list.size());
  parallel_for(static_cast<int>(N_list.size()), [&](int idx) {
    int N = N_list[idx];
    auto s = assemble_blocks(p, {N, p.L, kind});
    auto sp = compute_spectrum(s);
    if (kind == scheme::orfd) {
      parts[idx].push_back({N, -1, p.k1, p.k2, sp.max_re()});
      return;
    }
    separate_branches(sp, s, bo);
    for (int j : jstar_list) {
      if (j > N) continue;  // keeps at least one pair per group
      parts[idx].push_back({N, j, p.k1, p.k2, max_re_retained(sp, build_filter(sp, j))});
    }
  });
  std::vector<sweep_row> out;
  for (auto& v : parts) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return std::tie(a.N, a.jstar) < std::tie(b.N, b.jstar); });
  return out;
}

// smallest j* whose max Re is within plateau_tol (relative) of the sweep minimum, per (N, k1, k2)
inline std::map<std::tuple<int, double, double>, int> optimal_jstar(const std::vector<sweep_row>& rows, double plateau_tol = 0.01) {
  std::map<std::tuple<int, double, double>, std::vector<sweep_row>> groups;
  for (auto& r : rows)
    if (r.jstar >= 0) groups[{r.N, r.k1, r.k2}].push_back(r);
  std::map<std::tuple<int, double, double>, int> out;
  for (auto& [key, g] : groups) {
    std::sort(g.begin(), g.end(), [](auto& a, auto& b) { return a.jstar < b.jstar; });
    double best = HUGE_VAL;
    for (auto& r : g) best = std::min(best, r.max_re);
    auto within = [&](const sweep_row& r) { return std::abs(r.max_re - best) <= plateau_tol * std::abs(best); };
    int pick = -1;
    for (auto& r : g)
      if (within(r)) {
        pick = r.jstar;
        break;
      }
    // the plateau must be observed over at least two sweep points unless the sweep is flat from the start
    if (pick == g.back().jstar && g.size() > 1)
      throw error(errc::no_plateau, "max Re still decreasing at the end of the sweep for N=" + std::to_string(std::get<0>(key)));
    out[key] = pick;
  }
  return out;
}

// smooth initial data on the mechanical eigen-direction, vanishing with its derivatives at both ends
inline Eigen::VectorXd initial_state_smooth(const grid_config& g, const material_params& p) {
  auto d = derive_constants(p);
  double b = d.b2.value_or(0.0);
  int n = g.n();
  Eigen::VectorXd x(4 * n);
  for (int j = 1; j <= n; ++j) {
    double s = std::pow(std::sin(M_PI * g.x(j) / g.L), 4);
    x(j - 1) = s;
    x(n + j - 1) = b * s;
    x(2 * n + j - 1) = 1e3 * s;
    x(3 * n + j - 1) = 1e3 * b * s;
  }
  return x;
}

struct convergence_report {
  std::vector<int> levels;
  int N_ref = 0;
  std::vector<double> h;
  std::vector<double> probe_times;
  double sigma_fit = 0;
  // [level][probe]
  std::vector<std::vector<double>> error_energy, energy_gap;
  // [pair][probe], pair i compares levels i and i+1
  std::vector<std::vector<double>> error_order, gap_order;
  double min_error_order = 0, min_gap_order = 0;
  double regression_error_order = 0, regression_residual = 0;
};

namespace detail {

struct modal_run {
  system_operator s;
  spectrum sp;
  Eigen::VectorXcd coeffs;
};

inline modal_run orfd_run(const material_params& p, int N) {
  modal_run r{assemble_blocks(p, {N, p.L, scheme::orfd}), {}, {}};
  auto c = conditioning_transform(r.s);
  r.sp = compute_spectrum(r.s);
  auto pr = project_state(r.sp, c, build_filter(r.sp, 0), initial_state_smooth(r.s.grid, p));
  r.coeffs = pr.coeffs;
  return r;
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y, double* residual) {
  int n = static_cast<int>(x.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = x[i];
    Y(i) = y[i];
  }
  Eigen::Vector2d c = X.colPivHouseholderQr().solve(Y);
  if (residual) *residual = std::sqrt((Y - X * c).squaredNorm() / n);
  return c(1);
}

}  // namespace detail

// Fine-grid oracle study for the order-reduced scheme. Coarse grids are not nested in the reference
// grid, so the reference fields are restricted with a cubic B-spline through its nodes.
inline convergence_report convergence_study(const material_params& p, const std::vector<int>& levels, int N_ref,
                                            std::vector<double> probe_times = {}) {
  if (levels.size() < 3) throw error(errc::insufficient_levels, "convergence study needs at least 3 levels");
  convergence_report rep;
  rep.levels = levels;
  rep.N_ref = N_ref;
  auto ref = detail::orfd_run(p, N_ref);
  std::vector<detail::modal_run> runs(levels.size());
  parallel_for(static_cast<int>(levels.size()), [&](int i) { runs[i] = detail::orfd_run(p, levels[i]); });

  if (probe_times.empty()) {
    // characteristic time from the coarsest level's decay
    energy_trace tr;
    auto& r0 = runs.front();
    for (double t : sample_times(0.1, 400)) {
      Eigen::VectorXd y = modal_propagate_scaled(r0.sp, r0.coeffs, t);
      tr.samples.push_back({t, energy_scaled(r0.s, y), 0.0});
    }
    rep.sigma_fit = fit_decay_rate(tr, 0.0, 0.1).sigma;
    for (double f : {0.2, 0.5, 0.8}) probe_times.push_back(f / rep.sigma_fit);
  }
  rep.probe_times = probe_times;

  auto cref = conditioning_transform(ref.s);
  const auto& pm = p;
  double a1 = pm.alpha1();
  for (size_t li = 0; li < runs.size(); ++li) {
    auto& r = runs[li];
    auto c = conditioning_transform(r.s);
    int n = r.s.n(), nr = ref.s.n();
    double h = r.s.h();
    rep.h.push_back(h);
    std::vector<double> ee, eg;
    for (double t : probe_times) {
      Eigen::VectorXd yr = modal_propagate_scaled(ref.sp, ref.coeffs, t);
      Eigen::VectorXd xr = cref.from_scaled(yr);
      Eigen::VectorXd y = modal_propagate_scaled(r.sp, r.coeffs, t);
      Eigen::VectorXd x = c.from_scaled(y);
      Eigen::VectorXd diff(4 * n);
      for (int b = 0; b < 4; ++b) {
        std::vector<double> vals(nr + 1);
        vals[0] = 0.0;
        for (int j = 0; j < nr; ++j) vals[j + 1] = xr(b * nr + j);
        boost::math::interpolators::cardinal_cubic_b_spline<double> sp(vals.begin(), vals.end(), 0.0, ref.s.h());
        for (int j = 1; j <= n; ++j) diff(b * n + j - 1) = x(b * n + j - 1) - sp(r.s.grid.x(j));
      }
      auto m = midpoints(r.s, diff);
      Eigen::ArrayXd cc = pm.gamma * m.u1.array() - m.u2.array();
      double e = 0.5 * h *
                 (pm.rho * m.w1.array().square() + pm.mu * m.w2.array().square() + pm.beta * cc.square() +
                  a1 * m.u1.array().square())
                     .sum();
      ee.push_back(e);
      eg.push_back(std::abs(energy_scaled(r.s, y) - energy_scaled(ref.s, yr)));
    }
    rep.error_energy.push_back(ee);
    rep.energy_gap.push_back(eg);
  }

  rep.min_error_order = rep.min_gap_order = HUGE_VAL;
  for (size_t i = 0; i + 1 < runs.size(); ++i) {
    std::vector<double> eo, go;
    double lh = std::log(rep.h[i] / rep.h[i + 1]);
    for (size_t k = 0; k < probe_times.size(); ++k) {
      eo.push_back(std::log(rep.error_energy[i][k] / rep.error_energy[i + 1][k]) / lh);
      go.push_back(std::log(rep.energy_gap[i][k] / rep.energy_gap[i + 1][k]) / lh);
      rep.min_error_order = std::min(rep.min_error_order, eo.back());
      rep.min_gap_order = std::min(rep.min_gap_order, go.back());
    }
    rep.error_order.push_back(eo);
    rep.gap_order.push_back(go);
  }
  // per-probe global regression, reported as the weakest slope and the largest residual
  rep.regression_error_order = HUGE_VAL;
  for (size_t k = 0; k < probe_times.size(); ++k) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < runs.size(); ++i) {
      lx.push_back(std::log(rep.h[i]));
      ly.push_back(std::log(rep.error_energy[i][k]));
    }
    double res = 0.0;
    rep.regression_error_order = std::min(rep.regression_error_order, detail::slope(lx, ly, &res));
    rep.regression_residual = std::max(rep.regression_residual, res);
  }
  return rep;
}

}  // namespace pzb
