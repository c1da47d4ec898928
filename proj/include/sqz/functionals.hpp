#pragma once

// Phase-space functionals of the drive.  With A = w1 cosh r and B = w1 sinh r
// (scaled time, amplitudes in units of xi), the spin branches m = +1, -1, 0
// accumulate the displacement
//     alpha_m(t) = {-i (A - m conj(B))},
// and the evolution factorises into squeeze x displacement x phase with
//     phi2 = Im {conj(A) {A}},
//     phi3 = Im {A {B}} - Im {B {A}},
//     phi4 = Im {B conj({B})},
// where {.} is the running integral from 0.  Everything below is computed in
// one Gauss-Legendre sweep that carries the inner antiderivatives of A and B
// across panels, with a panel-doubling certificate on all outputs at once.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "sqz/drive.hpp"
#include "sqz/quadrature.hpp"

namespace sqz {

struct PhaseFunctionals {
  double t = 0.0; // physical time [s]
  complexd alpha_plus, alpha_minus;
  double r = 0.0;
  complexd gamma_plus, gamma_minus; // displacement after commuting the squeeze out front
  double phi2 = 0.0, phi3 = 0.0, phi4 = 0.0;
};

// Residuals of the six gate conditions, evaluated at the nominal gate end:
// c1, c2 close the displacement on both branches, c3 closes the squeeze,
// c4 kills the linear spin phase, c5 sets the entangling phase, c6 makes it
// stationary against a common Rabi rescale of every coefficient.
struct ConstraintResiduals {
  complexd c1, c2;
  double c3 = 0.0, c4 = 0.0, c5 = 0.0, c6 = 0.0;
};

namespace detail {

struct SweepSums {
  complexd int_a, int_b; // {A}(end), {B}(end)
  double phi2 = 0.0, phi3 = 0.0, phi4 = 0.0;
};

inline SweepSums sweep_fixed(const DriveSpec& spec, double tau_end, int panels,
                             const GaussTable& t) {
  const int k = t.k;
  const double h = tau_end / panels;
  std::vector<complexd> a(k), b(k);
  SweepSums out{};
  complexd pre_a = 0.0, pre_b = 0.0; // antiderivatives at the panel start
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int i = 0; i < k; ++i) {
      const double tau = mid + 0.5 * h * t.node[i];
      const complexd w1 = w1_scaled(spec, tau);
      const double r = r_scaled(spec, tau);
      a[i] = w1 * std::cosh(r);
      b[i] = w1 * std::sinh(r);
    }
    complexd panel_a = 0.0, panel_b = 0.0;
    for (int j = 0; j < k; ++j) {
      complexd cum_a = 0.0, cum_b = 0.0;
      const double* row = &t.cumulative[static_cast<size_t>(j) * k];
      for (int i = 0; i < k; ++i) {
        cum_a += row[i] * a[i];
        cum_b += row[i] * b[i];
      }
      cum_a = pre_a + 0.5 * h * cum_a;
      cum_b = pre_b + 0.5 * h * cum_b;
      const double wj = 0.5 * h * t.weight[j];
      out.phi2 += wj * std::imag(std::conj(a[j]) * cum_a);
      out.phi3 += wj * (std::imag(a[j] * cum_b) - std::imag(b[j] * cum_a));
      out.phi4 += wj * std::imag(b[j] * std::conj(cum_b));
      panel_a += t.weight[j] * a[j];
      panel_b += t.weight[j] * b[j];
    }
    pre_a += 0.5 * h * panel_a;
    pre_b += 0.5 * h * panel_b;
  }
  out.int_a = pre_a;
  out.int_b = pre_b;
  return out;
}

inline double sweep_distance(const SweepSums& x, const SweepSums& y) {
  double d = std::abs(x.int_a - y.int_a);
  d = std::max(d, std::abs(x.int_b - y.int_b));
  d = std::max(d, std::abs(x.phi2 - y.phi2));
  d = std::max(d, std::abs(x.phi3 - y.phi3));
  d = std::max(d, std::abs(x.phi4 - y.phi4));
  return d;
}

inline SweepSums sweep(const DriveSpec& spec, double tau_end, const QuadratureConfig& cfg) {
  validate(cfg);
  const GaussTable& t = gauss_table(cfg.nodes_per_panel);
  SweepSums coarse{};
  SweepSums fine = sweep_fixed(spec, tau_end, panel_count(tau_end, cfg, 0), t);
  for (int d = 1; d <= cfg.max_refinements; ++d) {
    coarse = fine;
    fine = sweep_fixed(spec, tau_end, panel_count(tau_end, cfg, d), t);
    if (sweep_distance(fine, coarse) <= cfg.abs_tol) return fine;
  }
  throw convergence_error("phase functionals: panel refinement did not reach abs_tol",
                          coarse.int_a, fine.int_a);
}

} // namespace detail

// Displacement of one spin branch at physical time t.  branch is +1, -1 or 0.
inline complexd alpha(const DriveSpec& spec, int branch, double t,
                      const QuadratureConfig& cfg = {}) {
  if (branch != 1 && branch != -1 && branch != 0)
    throw std::invalid_argument("alpha: branch must be +1, -1 or 0");
  const detail::SweepSums s = detail::sweep(spec, spec.xi * t, cfg);
  return complexd{0.0, -1.0} * (s.int_a - double(branch) * std::conj(s.int_b));
}

inline PhaseFunctionals phase_functionals(const DriveSpec& spec, double t,
                                          const QuadratureConfig& cfg = {}) {
  const detail::SweepSums s = detail::sweep(spec, spec.xi * t, cfg);
  PhaseFunctionals f;
  f.t = t;
  const complexd minus_i{0.0, -1.0};
  f.alpha_plus = minus_i * (s.int_a - std::conj(s.int_b));
  f.alpha_minus = minus_i * (s.int_a + std::conj(s.int_b));
  f.r = r_scaled(spec, spec.xi * t);
  const double ch = std::cosh(f.r), sh = std::sinh(f.r);
  f.gamma_plus = f.alpha_plus * ch - std::conj(f.alpha_plus) * sh;
  f.gamma_minus = f.alpha_minus * ch + std::conj(f.alpha_minus) * sh;
  f.phi2 = s.phi2;
  f.phi3 = s.phi3;
  f.phi4 = s.phi4;
  return f;
}

namespace detail {

// Entangling phase at the nominal gate end as a function of a common
// coefficient rescale (1 + eps).
inline double entangling_phase_scaled(DriveSpec spec, double eps, const QuadratureConfig& cfg) {
  spec.rabi_scale *= (1.0 + eps);
  const SweepSums s = sweep(spec, tau_period, cfg);
  return s.phi2 + s.phi4;
}

} // namespace detail

// Derivative of the entangling phase along a common Rabi rescale, by a
// Richardson-extrapolated central difference.
inline double rabi_stationarity_residual(const DriveSpec& spec, const QuadratureConfig& cfg = {},
                                         double eps = 1e-4) {
  auto phase = [&](double e) { return detail::entangling_phase_scaled(spec, e, cfg); };
  const double d1 = (phase(eps) - phase(-eps)) / (2.0 * eps);
  const double d2 = (phase(eps / 2.0) - phase(-eps / 2.0)) / eps;
  return (4.0 * d2 - d1) / 3.0;
}

inline ConstraintResiduals constraint_residuals(const DriveSpec& spec, double target_phase,
                                                const QuadratureConfig& cfg = {}) {
  const detail::SweepSums s = detail::sweep(spec, tau_period, cfg);
  ConstraintResiduals r;
  r.c1 = s.int_a;
  r.c2 = std::conj(s.int_b);
  r.c3 = r_scaled(spec, tau_period);
  r.c4 = s.phi3;
  r.c5 = s.phi2 + s.phi4 - target_phase;
  r.c6 = rabi_stationarity_residual(spec, cfg);
  return r;
}

// Quadrature widths along the m = +1 trajectory in the published labelling,
// (delta_x, delta_p) = (e^{r}/2, e^{-r}/2); their product is always 1/4.
inline std::pair<double, double> quadrature_widths(const DriveSpec& spec, double t) {
  const double r = r_scaled(spec, spec.xi * t);
  return {0.5 * std::exp(r), 0.5 * std::exp(-r)};
}

} // namespace sqz
