#pragma once

// First-principles propagator: evolves each spin branch of the interaction
// Hamiltonian m [w1(t) a+ + i w2(t) a+^2] + h.c. in a truncated Fock space.
// Independent of the functionals module end to end, so it can adjudicate
// every closed-form quantity; it is also the only path that models detuning
// errors or excited motional input states.

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqz/fidelity.hpp"

namespace sqz {

struct FockConfig {
  int n_max = 40;             // truncation dimension (levels 0 .. n_max-1)
  int steps_per_period = 4096;
  double tail_tol = 1e-8;     // max population allowed in the top 4 levels
};

inline void validate(const FockConfig& cfg) {
  if (cfg.n_max < 8) throw std::invalid_argument("FockConfig: n_max must be at least 8");
  if (cfg.steps_per_period < 256)
    throw std::invalid_argument("FockConfig: steps_per_period must be at least 256");
  if (!(cfg.tail_tol > 0.0) || !std::isfinite(cfg.tail_tol))
    throw std::invalid_argument("FockConfig: tail_tol must be positive and finite");
}

struct BranchState {
  int branch = 1; // J_x eigenvalue m: +1, -1 or 0
  std::vector<complexd> amplitudes;
};

class tail_overflow : public std::runtime_error {
 public:
  tail_overflow(double leaked, double tau)
      : std::runtime_error(format_message(leaked, tau)),
        leaked_population(leaked),
        at_scaled_time(tau) {}
  double leaked_population;
  double at_scaled_time;

 private:
  static std::string format_message(double leaked, double tau) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "Fock tail overflow: population %.3e in the top 4 levels at scaled time %.4f; "
                  "increase n_max",
                  leaked, tau);
    return buf;
  }
};

inline BranchState fock_state(int branch, int n, const FockConfig& cfg = {}) {
  validate(cfg);
  if (branch != 1 && branch != -1 && branch != 0)
    throw std::invalid_argument("fock_state: branch must be +1, -1 or 0");
  if (n < 0 || n >= cfg.n_max) throw std::invalid_argument("fock_state: level outside truncation");
  BranchState st;
  st.branch = branch;
  st.amplitudes.assign(static_cast<size_t>(cfg.n_max), complexd{});
  st.amplitudes[static_cast<size_t>(n)] = 1.0;
  return st;
}

namespace detail {

// H psi for H = f a+ + f* a + i g a+^2 - i g* a^2 (bandwidth 2).
inline void apply_hamiltonian(complexd f, complexd g, const std::vector<double>& sq1,
                              const std::vector<double>& sq2, const std::vector<complexd>& in,
                              std::vector<complexd>& out) {
  const int dim = static_cast<int>(in.size());
  const complexd cf = std::conj(f);
  const complexd ig = complexd{0.0, 1.0} * g;
  const complexd icg = complexd{0.0, 1.0} * std::conj(g);
  for (int n = 0; n < dim; ++n) {
    complexd v{};
    if (n >= 1) v += f * sq1[static_cast<size_t>(n)] * in[static_cast<size_t>(n - 1)];
    if (n + 1 < dim) v += cf * sq1[static_cast<size_t>(n + 1)] * in[static_cast<size_t>(n + 1)];
    if (n >= 2) v += ig * sq2[static_cast<size_t>(n)] * in[static_cast<size_t>(n - 2)];
    if (n + 2 < dim) v -= icg * sq2[static_cast<size_t>(n + 2)] * in[static_cast<size_t>(n + 2)];
    out[static_cast<size_t>(n)] = v;
  }
}

inline double squared_norm(const std::vector<complexd>& v) {
  double s = 0.0;
  for (const complexd& c : v) s += std::norm(c);
  return s;
}

// psi <- exp(-i dtau H) psi via the Taylor series on the vector. Callers keep
// |H| dtau below ~0.6 so the series converges in a dozen terms.
inline void expm_apply(complexd f, complexd g, double dtau, const std::vector<double>& sq1,
                       const std::vector<double>& sq2, std::vector<complexd>& psi,
                       std::vector<complexd>& term, std::vector<complexd>& scratch) {
  term = psi;
  for (int j = 1; j <= 64; ++j) {
    apply_hamiltonian(f, g, sq1, sq2, term, scratch);
    const complexd factor = complexd{0.0, -dtau} / double(j);
    for (size_t n = 0; n < psi.size(); ++n) {
      term[n] = factor * scratch[n];
      psi[n] += term[n];
    }
    if (squared_norm(term) < 1e-36 * squared_norm(psi)) return;
  }
  throw std::runtime_error("expm_apply: Taylor series failed to converge");
}

} // namespace detail

// Evolve one spin branch from `initial` to the (error-adjusted) gate end.
// Second-order midpoint exponential stepping; the top 4 Fock levels are
// monitored every step and overflow is a hard failure.
inline BranchState propagate_branch(const DriveSpec& spec, const BranchState& initial,
                                    const ErrorModel& err = {}, const FockConfig& cfg = {}) {
  validate(cfg);
  if (initial.branch != 1 && initial.branch != -1 && initial.branch != 0)
    throw std::invalid_argument("propagate_branch: branch must be +1, -1 or 0");
  if (static_cast<int>(initial.amplitudes.size()) != cfg.n_max)
    throw std::invalid_argument("propagate_branch: state dimension does not match n_max");
  if (std::abs(detail::squared_norm(initial.amplitudes) - 1.0) > 1e-10)
    throw std::invalid_argument("propagate_branch: initial state must be normalized");

  BranchState st = initial;
  if (st.branch == 0) return st; // J_x annihilates the m = 0 subspace

  const EffectiveDrive eff = apply_error(spec, err);
  const double tau_end = eff.tau_end;
  const int dim = cfg.n_max;
  const long steps =
      std::max<long>(1, static_cast<long>(std::ceil(cfg.steps_per_period * tau_end / tau_period)));
  const double dtau = tau_end / double(steps);
  const double m = double(st.branch);
  const double dnu = err.delta_nu_over_xi;

  std::vector<double> sq1(static_cast<size_t>(dim) + 2), sq2(static_cast<size_t>(dim) + 2);
  for (size_t n = 0; n < sq1.size(); ++n) {
    sq1[n] = std::sqrt(double(n));
    sq2[n] = std::sqrt(double(n) * (double(n) - 1.0));
  }
  std::vector<complexd> term(st.amplitudes.size()), scratch(st.amplitudes.size());

  const double root_n = std::sqrt(double(dim));
  for (long k = 0; k < steps; ++k) {
    const double tau_mid = (double(k) + 0.5) * dtau;
    const complexd f = m * w1_scaled(eff.spec, tau_mid) * std::polar(1.0, dnu * tau_mid);
    const complexd g = m * w2_scaled(eff.spec, tau_mid) * std::polar(1.0, 2.0 * dnu * tau_mid);
    // Keep |H| dtau small enough for a short Taylor series.
    const double budget = 2.0 * (std::abs(f) * root_n + std::abs(g) * double(dim)) * dtau;
    const int substeps = budget > 0.5 ? static_cast<int>(std::ceil(budget / 0.5)) : 1;
    for (int s = 0; s < substeps; ++s)
      detail::expm_apply(f, g, dtau / double(substeps), sq1, sq2, st.amplitudes, term, scratch);

    if (!std::isfinite(detail::squared_norm(st.amplitudes)))
      throw std::runtime_error("propagate_branch: non-finite amplitudes");
  }
  // The tail bound applies to the state actually returned; transient mid-pulse
  // population near the boundary is covered by convergence_report instead.
  double tail = 0.0;
  for (int n = dim - 4; n < dim; ++n) tail += std::norm(st.amplitudes[static_cast<size_t>(n)]);
  if (tail > cfg.tail_tol) throw tail_overflow(tail, tau_end);
  return st;
}

inline BranchState propagate_branch(const DriveSpec& spec, int branch, const ErrorModel& err = {},
                                    const FockConfig& cfg = {}) {
  return propagate_branch(spec, fock_state(branch, 0, cfg), err, cfg);
}

struct Moments {
  complexd a;  // <a>
  complexd a2; // <a^2>
  double n;    // <a+ a>
  double mean_x, mean_p, var_x, var_p;
};

inline Moments state_moments(const BranchState& st) {
  const std::vector<complexd>& psi = st.amplitudes;
  const size_t dim = psi.size();
  Moments mom{};
  for (size_t n = 0; n < dim; ++n) {
    const double pop = std::norm(psi[n]);
    mom.n += double(n) * pop;
    if (n + 1 < dim) mom.a += std::sqrt(double(n) + 1.0) * std::conj(psi[n]) * psi[n + 1];
    if (n + 2 < dim)
      mom.a2 += std::sqrt((double(n) + 1.0) * (double(n) + 2.0)) * std::conj(psi[n]) * psi[n + 2];
  }
  mom.mean_x = mom.a.real();
  mom.mean_p = mom.a.imag();
  mom.var_x = (2.0 * mom.a2.real() + 2.0 * mom.n + 1.0) / 4.0 - mom.mean_x * mom.mean_x;
  mom.var_p = (-2.0 * mom.a2.real() + 2.0 * mom.n + 1.0) / 4.0 - mom.mean_p * mom.mean_p;
  return mom;
}

// Gate fidelity from branch propagations, |00> = (|++> + |+-> + |-+> + |-->)/2
// in the J_x basis: F = |1/2 <n|psi_0> + 1/4 e^{i phi}(<n|psi_+> + <n|psi_->)|^2.
// Handles detuning errors and excited Fock input |n>.
inline FidelityResult numeric_fidelity(const DriveSpec& spec, const ErrorModel& err = {},
                                       double target_phase = -pi / 2.0, const FockConfig& cfg = {},
                                       int initial_n = 0) {
  validate(cfg);
  if (initial_n < 0 || 2 * initial_n >= cfg.n_max)
    throw std::invalid_argument("numeric_fidelity: initial_n must stay below n_max/2");
  const size_t n = static_cast<size_t>(initial_n);
  const BranchState plus = propagate_branch(spec, fock_state(+1, initial_n, cfg), err, cfg);
  const BranchState minus = propagate_branch(spec, fock_state(-1, initial_n, cfg), err, cfg);
  const complexd amp =
      0.5 + 0.25 * std::polar(1.0, target_phase) * (plus.amplitudes[n] + minus.amplitudes[n]);

  FidelityResult out;
  out.f = std::norm(amp);
  out.error_point = err;
  out.method = Method::oracle;
  const EffectiveDrive eff = apply_error(spec, err);
  out.functionals = phase_functionals(eff.spec, eff.t_end);
  return out;
}

struct ConvergenceReport {
  double f = std::numeric_limits<double>::quiet_NaN();
  double f_double_steps = std::numeric_limits<double>::quiet_NaN();
  double f_more_levels = std::numeric_limits<double>::quiet_NaN();
  double delta_steps = std::numeric_limits<double>::quiet_NaN();
  double delta_levels = std::numeric_limits<double>::quiet_NaN();
  bool tail_overflow_hit = false;
  bool converged = false;
};

// Self-consistency check: recompute F with doubled stepping and with 16 extra
// Fock levels. Failures are carried in the report, not thrown.
inline ConvergenceReport convergence_report(const DriveSpec& spec, const ErrorModel& err = {},
                                            double target_phase = -pi / 2.0,
                                            const FockConfig& cfg = {}) {
  validate(cfg);
  ConvergenceReport rep;
  auto attempt = [&](const FockConfig& c, double& slot) {
    try {
      slot = numeric_fidelity(spec, err, target_phase, c).f;
    } catch (const tail_overflow&) {
      rep.tail_overflow_hit = true;
    }
  };
  attempt(cfg, rep.f);
  FockConfig fine = cfg;
  fine.steps_per_period = 2 * cfg.steps_per_period;
  attempt(fine, rep.f_double_steps);
  FockConfig wide = cfg;
  wide.n_max = cfg.n_max + 16;
  attempt(wide, rep.f_more_levels);
  rep.delta_steps = std::abs(rep.f - rep.f_double_steps);
  rep.delta_levels = std::abs(rep.f - rep.f_more_levels);
  rep.converged = std::isfinite(rep.delta_steps) && std::isfinite(rep.delta_levels) &&
                  rep.delta_steps < 1e-6 && rep.delta_levels < 1e-6;
  return rep;
}

} // namespace sqz
