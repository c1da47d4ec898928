#pragma once

// Gate design: pick the two free amplitudes (a, s) of a drive template so the
// entangling phase hits the target and is stationary against a common Rabi
// rescale.  A sixth-order series solution of those two conditions for the
// three-tone template seeds a finite-difference gradient descent on the full
// residuals.  Also provides the single-tone baseline amplitude and a peak
// Rabi-frequency estimate for any drive.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sqz/drive.hpp"
#include "sqz/functionals.hpp"

namespace sqz {

// Drive templates with free amplitudes (a, s).  "robust" is the three-tone
// stack a(1,-10/3,7/3) on harmonics (3,5,7) with squeeze s(1,-1/2) on (2,4);
// "minimal" keeps a single tone per stack, a on harmonic 3 and s on 2.
enum class DesignTemplate { robust, minimal };

inline DriveSpec template_spec(DesignTemplate tmpl, double xi, double a, double s) {
  DriveSpec spec;
  spec.xi = xi;
  switch (tmpl) {
    case DesignTemplate::robust:
      spec.odd_harmonics = {{1, a}, {2, -10.0 * a / 3.0}, {3, 7.0 * a / 3.0}};
      spec.sine_harmonics = {{1, s}, {2, -s / 2.0}};
      break;
    case DesignTemplate::minimal:
      spec.odd_harmonics = {{1, a}};
      spec.sine_harmonics = {{1, s}};
      break;
    default:
      throw std::invalid_argument("template_spec: unknown template");
  }
  return spec;
}

struct SeedSolution {
  double a = 0.0, s = 0.0;
};

// Series solution for the three-tone template.  Expanding the entangling
// phase of that template to sixth order in the amplitudes gives
//   phase      = (4 pi a^2 / 135135) (71582 s^4 + 106431 s^2 - 225225),
//   stationary = (8 pi a^2 /  45045) (71582 s^4 +  70954 s^2 -  75075) = 0.
// The second line is a quadratic in s^2; the first then fixes a^2 linearly in
// the target phase.
inline SeedSolution solve_expanded(double target_phase = -pi / 2.0) {
  constexpr double q4 = 71582.0, q2s = 70954.0, q0s = 75075.0;
  constexpr double p2 = 106431.0, p0 = 225225.0, denom = 135135.0;
  const double disc = q2s * q2s + 4.0 * q4 * q0s;
  const double u = (-q2s + std::sqrt(disc)) / (2.0 * q4); // s^2, positive root
  const double p_of_u = q4 * u * u + p2 * u - p0;
  const double a2 = target_phase * denom / (4.0 * pi * p_of_u);
  if (!(a2 > 0.0))
    throw std::invalid_argument("solve_expanded: target phase incompatible with this template");
  return {std::sqrt(a2), std::sqrt(u)};
}

struct GateDesign {
  DriveSpec spec;
  double target_phase = -pi / 2.0;
  SeedSolution seed;
  SeedSolution refined;
  ConstraintResiduals residuals;
  int iterations = 0;
};

// Gradient descent on c5^2 + c6^2 over (a, s): central-difference gradient,
// Armijo backtracking line search, canonical positive amplitudes on output.
inline GateDesign refine_design(SeedSolution seed, DesignTemplate tmpl, double xi,
                                double target_phase = -pi / 2.0, double tol = 1e-6,
                                const QuadratureConfig& cfg = {}, int max_iterations = 500) {
  auto residual_pair = [&](double a, double s) -> std::pair<double, double> {
    const DriveSpec spec = template_spec(tmpl, xi, a, s);
    const detail::SweepSums sums = detail::sweep(spec, tau_period, cfg);
    const double c5 = sums.phi2 + sums.phi4 - target_phase;
    const double c6 = rabi_stationarity_residual(spec, cfg);
    return {c5, c6};
  };
  auto objective = [&](double a, double s) {
    auto [c5, c6] = residual_pair(a, s);
    return c5 * c5 + c6 * c6;
  };

  double a = seed.a, s = seed.s;
  double g = objective(a, s);
  double step = 1e-2;
  const double fd = 1e-5;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    auto [c5, c6] = residual_pair(a, s);
    if (std::abs(c5) <= tol && std::abs(c6) <= tol) break;
    const double ga = (objective(a + fd, s) - objective(a - fd, s)) / (2.0 * fd);
    const double gs = (objective(a, s + fd) - objective(a, s - fd)) / (2.0 * fd);
    const double slope = ga * ga + gs * gs;
    if (slope == 0.0) break;
    // Armijo backtracking with a mildly expanding initial step.
    double t = step * 2.0;
    bool moved = false;
    for (int bt = 0; bt < 48; ++bt) {
      const double trial = objective(a - t * ga, s - t * gs);
      if (trial <= g - 1e-4 * t * slope) {
        a -= t * ga;
        s -= t * gs;
        g = trial;
        step = t;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved)
      throw std::runtime_error("refine_design: line search stalled before reaching tolerance");
  }

  GateDesign out;
  out.seed = seed;
  // Canonical representative: both amplitudes positive (the four sign choices
  // are equivalent drives).
  out.refined = {std::abs(a), std::abs(s)};
  out.spec = template_spec(tmpl, xi, out.refined.a, out.refined.s);
  out.target_phase = target_phase;
  out.iterations = iter;
  out.residuals = constraint_residuals(out.spec, target_phase, cfg);
  if (iter >= max_iterations &&
      (std::abs(out.residuals.c5) > tol || std::abs(out.residuals.c6) > tol))
    throw std::runtime_error("refine_design: no convergence within the iteration budget");
  return out;
}

// Single-tone baseline: w1 = c e^{i xi t} accumulates phase -2 pi c^2 / xi^2,
// so the amplitude for a target phase is c = xi sqrt(-phase / 2 pi).
inline double ms_amplitude(double xi, double target_phase = -pi / 2.0) {
  if (!(xi > 0.0)) throw std::invalid_argument("ms_amplitude: xi must be positive");
  if (!(target_phase < 0.0))
    throw std::invalid_argument("ms_amplitude: target phase must be negative");
  return xi * std::sqrt(-target_phase / (2.0 * pi));
}

// Convenience front end used by the CLI: seed + refine per profile.
inline GateDesign design_gate(Profile profile, double xi, double target_phase = -pi / 2.0,
                              double tol = 1e-6, const QuadratureConfig& cfg = {}) {
  switch (profile) {
    case Profile::robust:
      return refine_design(solve_expanded(target_phase), DesignTemplate::robust, xi,
                           target_phase, tol, cfg);
    case Profile::minimal:
      return refine_design({1.1521, 0.8896}, DesignTemplate::minimal, xi, target_phase, tol,
                           cfg);
    case Profile::ms: {
      GateDesign out;
      const double c = ms_amplitude(xi, target_phase) / xi;
      out.spec.xi = xi;
      out.spec.odd_harmonics = {{0, c}};
      out.target_phase = target_phase;
      out.seed = {c, 0.0};
      out.refined = out.seed;
      out.iterations = 0;
      out.residuals = constraint_residuals(out.spec, target_phase, cfg);
      return out;
    }
    default:
      throw std::invalid_argument("design_gate: unknown profile");
  }
}

// Peak-amplitude Rabi requirement.  omega_first = 2 max|w1|/xi and
// omega_second = 2 max|w2|/xi are the conventional per-sideband coefficients;
// the total requirement is Omega = (omega_first/eta + omega_second/eta^2) xi/2,
// normalised so the single-tone baseline (omega_first = 1) gives exactly the
// textbook Omega_ms = xi/(2 eta) and ratio_to_ms = 1.
struct RabiEstimate {
  double eta = 0.0;
  double omega_first = 0.0;  // in units of xi; requirement enters as /eta
  double omega_second = 0.0; // in units of xi; requirement enters as /eta^2
  double omega_total_over_xi = 0.0;
  double ratio_to_ms = 0.0;
};

namespace detail {

template <class F>
double peak_over_period(F&& f) {
  // Dense scan plus parabolic refinement; drive envelopes are band-limited to
  // harmonic max_harmonic_index so 1 << 14 samples bound the peak tightly.
  const int n = 1 << 14;
  double best = 0.0;
  int best_i = 0;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    vals[i] = f(tau_period * i / n);
    if (vals[i] > best) {
      best = vals[i];
      best_i = i;
    }
  }
  const double vm = vals[(best_i + n - 1) % n], v0 = vals[best_i], vp = vals[(best_i + 1) % n];
  const double den = vm - 2.0 * v0 + vp;
  if (den < 0.0) {
    const double delta = 0.5 * (vm - vp) / den;
    return v0 - 0.25 * (vm - vp) * delta;
  }
  return v0;
}

} // namespace detail

inline RabiEstimate rabi_estimate(const DriveSpec& spec, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("rabi_estimate: eta must lie in (0, 1)");
  RabiEstimate est;
  est.eta = eta;
  est.omega_first =
      2.0 * detail::peak_over_period([&](double tau) { return std::abs(w1_scaled(spec, tau)); });
  est.omega_second =
      2.0 * detail::peak_over_period([&](double tau) { return std::abs(w2_scaled(spec, tau)); });
  est.omega_total_over_xi = 0.5 * (est.omega_first / eta + est.omega_second / (eta * eta));
  est.ratio_to_ms = est.omega_first + est.omega_second / eta; // Omega / (xi / 2 eta)
  return est;
}

// Design-file serialisation: the drive schema plus the design record.

inline nlohmann::ordered_json design_to_json(const GateDesign& d) {
  nlohmann::ordered_json j = drive_to_json(d.spec);
  j["target_phase"] = d.target_phase;
  j["seed"] = {d.seed.a, d.seed.s};
  j["refined"] = {d.refined.a, d.refined.s};
  j["residuals"] = {{"c1", {d.residuals.c1.real(), d.residuals.c1.imag()}},
                    {"c2", {d.residuals.c2.real(), d.residuals.c2.imag()}},
                    {"c3", d.residuals.c3},
                    {"c4", d.residuals.c4},
                    {"c5", d.residuals.c5},
                    {"c6", d.residuals.c6}};
  j["iterations"] = d.iterations;
  return j;
}

// Accepts both bare drive files and full design records.
struct LoadedDesign {
  DriveSpec spec;
  double target_phase = -pi / 2.0;
};

inline LoadedDesign design_from_json(const nlohmann::json& j) {
  LoadedDesign out;
  out.spec = drive_from_json(j);
  if (j.contains("target_phase")) {
    if (!j["target_phase"].is_number())
      throw std::invalid_argument("design file: target_phase must be a number");
    out.target_phase = j["target_phase"].get<double>();
  }
  return out;
}

} // namespace sqz
