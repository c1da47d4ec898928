#pragma once

// Phase-space trajectory export on a uniform time grid: branch displacements
// alpha_pm, squeeze-commuted displacements gamma_pm, squeeze parameter and
// quadrature widths.  One cumulative quadrature sweep covers the whole grid,
// so the cost is O(N), not O(N^2).

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "sqz/functionals.hpp"

namespace sqz {

struct TrajectoryPoint {
  double t = 0.0; // physical time [s]
  complexd alpha_plus, alpha_minus;
  complexd gamma_plus, gamma_minus;
  double r = 0.0;
  double delta_x = 0.5, delta_p = 0.5;
};

namespace detail {

// sweep_fixed with panel boundaries pinned to the grid: after the panels of
// each segment, the running sums are exactly the functionals at that grid
// time, so one pass yields every snapshot.
inline std::vector<SweepSums> grid_sweep_fixed(const DriveSpec& spec, double tau_end,
                                               int n_points, int panels_per_segment,
                                               const GaussTable& t) {
  const int k = t.k;
  const int segments = n_points - 1;
  const double h = tau_end / segments / panels_per_segment;
  const size_t nodes = static_cast<size_t>(k);
  std::vector<complexd> a(nodes), b(nodes);
  std::vector<SweepSums> snaps(static_cast<size_t>(n_points));
  SweepSums run{};
  complexd pre_a = 0.0, pre_b = 0.0;
  snaps[0] = run; // tau = 0
  for (int seg = 0; seg < segments; ++seg) {
    for (int p = 0; p < panels_per_segment; ++p) {
      const double mid = (double(seg) * panels_per_segment + p + 0.5) * h;
      for (int i = 0; i < k; ++i) {
        const double tau = mid + 0.5 * h * t.node[i];
        const complexd w1 = w1_scaled(spec, tau);
        const double r = r_scaled(spec, tau);
        a[size_t(i)] = w1 * std::cosh(r);
        b[size_t(i)] = w1 * std::sinh(r);
      }
      complexd panel_a = 0.0, panel_b = 0.0;
      for (int j = 0; j < k; ++j) {
        complexd cum_a = 0.0, cum_b = 0.0;
        const double* row = &t.cumulative[static_cast<size_t>(j) * k];
        for (int i = 0; i < k; ++i) {
          cum_a += row[i] * a[size_t(i)];
          cum_b += row[i] * b[size_t(i)];
        }
        cum_a = pre_a + 0.5 * h * cum_a;
        cum_b = pre_b + 0.5 * h * cum_b;
        const double wj = 0.5 * h * t.weight[j];
        run.phi2 += wj * std::imag(std::conj(a[size_t(j)]) * cum_a);
        run.phi3 += wj * (std::imag(a[size_t(j)] * cum_b) - std::imag(b[size_t(j)] * cum_a));
        run.phi4 += wj * std::imag(b[size_t(j)] * std::conj(cum_b));
        panel_a += t.weight[j] * a[size_t(j)];
        panel_b += t.weight[j] * b[size_t(j)];
      }
      pre_a += 0.5 * h * panel_a;
      pre_b += 0.5 * h * panel_b;
    }
    run.int_a = pre_a;
    run.int_b = pre_b;
    snaps[size_t(seg) + 1] = run;
  }
  return snaps;
}

inline std::vector<SweepSums> grid_sweep(const DriveSpec& spec, double tau_end, int n_points,
                                         const QuadratureConfig& cfg) {
  validate(cfg);
  const GaussTable& t = gauss_table(cfg.nodes_per_panel);
  const int segments = n_points - 1;
  auto per_segment = [&](int doublings) {
    const double seg = tau_end / segments;
    int p = int(std::ceil(cfg.panels_per_period * seg / tau_period));
    if (p < 1) p = 1;
    return p << doublings;
  };
  auto distance = [](const std::vector<SweepSums>& x, const std::vector<SweepSums>& y) {
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i) d = std::max(d, sweep_distance(x[i], y[i]));
    return d;
  };
  std::vector<SweepSums> coarse;
  std::vector<SweepSums> fine = grid_sweep_fixed(spec, tau_end, n_points, per_segment(0), t);
  for (int d = 1; d <= cfg.max_refinements; ++d) {
    coarse = std::move(fine);
    fine = grid_sweep_fixed(spec, tau_end, n_points, per_segment(d), t);
    if (distance(coarse, fine) <= cfg.abs_tol) return fine;
  }
  throw convergence_error("trajectory: panel refinement did not reach abs_tol",
                          coarse.back().int_a, fine.back().int_a);
}

} // namespace detail

inline std::vector<TrajectoryPoint> compute_trajectory(const DriveSpec& spec, int n_points,
                                                       const QuadratureConfig& cfg = {}) {
  validate(spec);
  if (n_points < 2) throw std::invalid_argument("trajectory: need at least 2 grid points");
  const std::vector<detail::SweepSums> snaps =
      detail::grid_sweep(spec, tau_period, n_points, cfg);
  std::vector<TrajectoryPoint> out(static_cast<size_t>(n_points));
  const double t_end = period(spec);
  const complexd minus_i{0.0, -1.0};
  for (int k = 0; k < n_points; ++k) {
    const detail::SweepSums& s = snaps[size_t(k)];
    TrajectoryPoint& p = out[size_t(k)];
    p.t = t_end * double(k) / (n_points - 1);
    p.alpha_plus = minus_i * (s.int_a - std::conj(s.int_b));
    p.alpha_minus = minus_i * (s.int_a + std::conj(s.int_b));
    const auto [r, w2] = eval_r_w2(spec, p.t);
    p.r = r;
    const double ch = std::cosh(r), sh = std::sinh(r);
    p.gamma_plus = p.alpha_plus * ch - std::conj(p.alpha_plus) * sh;
    p.gamma_minus = p.alpha_minus * ch + std::conj(p.alpha_minus) * sh;
    const auto [dx, dp] = quadrature_widths(spec, p.t);
    p.delta_x = dx;
    p.delta_p = dp;
  }
  return out;
}

inline void write_csv(const std::vector<TrajectoryPoint>& points, std::ostream& out) {
  out << "t,re_alpha_p,im_alpha_p,re_alpha_m,im_alpha_m,"
         "re_gamma_p,im_gamma_p,re_gamma_m,im_gamma_m,r,delta_x,delta_p\n";
  using detail::full_precision;
  for (const TrajectoryPoint& p : points)
    out << full_precision(p.t) << ',' << full_precision(p.alpha_plus.real()) << ','
        << full_precision(p.alpha_plus.imag()) << ',' << full_precision(p.alpha_minus.real())
        << ',' << full_precision(p.alpha_minus.imag()) << ','
        << full_precision(p.gamma_plus.real()) << ',' << full_precision(p.gamma_plus.imag())
        << ',' << full_precision(p.gamma_minus.real()) << ','
        << full_precision(p.gamma_minus.imag()) << ',' << full_precision(p.r) << ','
        << full_precision(p.delta_x) << ',' << full_precision(p.delta_p) << '\n';
}

} // namespace sqz
