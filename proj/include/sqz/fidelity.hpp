#pragma once

// Closed-form gate fidelity under quasi-static scale and timing errors.
// The two displaced branches contribute squeezed-vacuum overlaps; detuning
// errors break the squeezing-frame solution and are handled by the Fock
// propagator instead.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "sqz/functionals.hpp"

namespace sqz {

enum class Method { closed_form, oracle };

inline const char* method_name(Method m) {
  return m == Method::closed_form ? "closed_form" : "oracle";
}

struct FidelityResult {
  double f = 0.0;
  ErrorModel error_point;
  Method method = Method::closed_form;
  PhaseFunctionals functionals; // evaluated at the effective gate time
};

// <0| D(g) S(z) |0> for real squeeze parameter z, S(z) = exp(z(a^2 - a+^2)/2).
inline complexd vacuum_overlap(complexd g, double z) {
  const complexd cg = std::conj(g);
  return std::exp(-0.5 * std::norm(g) - 0.5 * cg * cg * std::tanh(z)) /
         std::sqrt(std::cosh(z));
}

// F = |1/2 + 1/4 e^{-i chi+} O+ + 1/4 e^{-i chi-} O-|^2 with
// chi± = (phi2 + phi4 - target) ± phi3 and O± the overlaps of the two
// displaced branches. Timing errors stretch the integration endpoint only;
// the tones keep playing.
inline FidelityResult closed_form_fidelity(const DriveSpec& spec, const ErrorModel& err = {},
                                           double target_phase = -pi / 2.0,
                                           const QuadratureConfig& cfg = {}) {
  if (err.delta_nu_over_xi != 0.0)
    throw std::invalid_argument(
        "closed_form_fidelity: detuning errors need the Fock-space propagator (method oracle)");
  const EffectiveDrive eff = apply_error(spec, err);
  FidelityResult out;
  out.error_point = err;
  out.method = Method::closed_form;
  out.functionals = phase_functionals(eff.spec, eff.t_end, cfg);
  const PhaseFunctionals& fn = out.functionals;
  const double chi_p = fn.phi2 + fn.phi4 - target_phase + fn.phi3;
  const double chi_m = fn.phi2 + fn.phi4 - target_phase - fn.phi3;
  const complexd amp = 0.5 +
                       0.25 * std::polar(1.0, -chi_p) * vacuum_overlap(fn.gamma_plus, fn.r) +
                       0.25 * std::polar(1.0, -chi_m) * vacuum_overlap(fn.gamma_minus, -fn.r);
  out.f = std::norm(amp);
  return out;
}

} // namespace sqz
