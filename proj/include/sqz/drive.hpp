#pragma once

// Spectral description of the two-sideband entangling drive.
//
// The first-sideband tone stack lives on odd harmonics of the gate frequency
// xi and drives a spin-dependent displacement,
//     w1(t) = lambda * sum_n a_{2n+1} exp(i(2n+1) xi t),
// the second-sideband stack is a sine series on even harmonics driving a
// spin-dependent squeeze with squeezing angle
//     r(t)  = lambda * sum_n s_{2n} sin(2n xi t),    w2(t) = -dr/dt / 2.
// All coefficients are kept in units of xi so a design file is scale free
// except for the single dimensional field xi.

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sqz {

using complexd = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
// One gate period in scaled time tau = xi * t.
inline constexpr double tau_period = 2.0 * std::numbers::pi;
// Highest allowed harmonic index; larger content signals a malformed file.
inline constexpr int max_harmonic_index = 64;

struct Harmonic {
  int n = 0;          // tone sits at (2n+1)*xi (odd stack) or 2n*xi (sine stack)
  double coeff = 0.0; // amplitude in units of xi

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

struct DriveSpec {
  double xi = 1.0;                      // gate angular frequency [rad/s]
  std::vector<Harmonic> odd_harmonics;  // displacement tones a_{2n+1}, n >= 0
  std::vector<Harmonic> sine_harmonics; // squeeze series s_{2n}, n >= 1
  double rabi_scale = 1.0;              // multiplies every coefficient

  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

// Static miscalibrations of a single gate shot.  delta_nu_over_xi never enters
// the drive coefficients; only the brute-force propagator can honour it.
struct ErrorModel {
  double delta_omega_rel = 0.0;  // Rabi-frequency offset, dOmega/Omega
  double delta_t_rel = 0.0;      // gate-time offset, dT/T
  double delta_nu_over_xi = 0.0; // motional-frequency offset in units of xi
};

enum class Profile { robust, minimal, ms };

inline double period(const DriveSpec& spec) { return tau_period / spec.xi; }

inline void validate(const DriveSpec& spec) {
  if (!(spec.xi > 0.0) || !std::isfinite(spec.xi))
    throw std::invalid_argument("drive: xi must be positive and finite");
  if (!std::isfinite(spec.rabi_scale) || !(spec.rabi_scale > 0.0))
    throw std::invalid_argument("drive: rabi_scale must be positive and finite");
  auto check_stack = [](const std::vector<Harmonic>& stack, int n_min, const char* name) {
    for (size_t i = 0; i < stack.size(); ++i) {
      const Harmonic& h = stack[i];
      if (h.n < n_min || h.n > max_harmonic_index)
        throw std::invalid_argument(std::string("drive: ") + name + " index out of range");
      if (!std::isfinite(h.coeff))
        throw std::invalid_argument(std::string("drive: ") + name + " coefficient not finite");
      for (size_t j = 0; j < i; ++j)
        if (stack[j].n == h.n)
          throw std::invalid_argument(std::string("drive: duplicate ") + name + " index");
    }
  };
  check_stack(spec.odd_harmonics, 0, "odd harmonic");
  check_stack(spec.sine_harmonics, 1, "sine harmonic");
}

// Scaled-time evaluation, tau = xi * t.  Values are in units of xi.

inline complexd w1_scaled(const DriveSpec& spec, double tau) {
  complexd acc = 0.0;
  for (const Harmonic& h : spec.odd_harmonics) {
    const double phase = (2.0 * h.n + 1.0) * tau;
    acc += h.coeff * complexd{std::cos(phase), std::sin(phase)};
  }
  return spec.rabi_scale * acc;
}

inline double r_scaled(const DriveSpec& spec, double tau) {
  double acc = 0.0;
  for (const Harmonic& h : spec.sine_harmonics) acc += h.coeff * std::sin(2.0 * h.n * tau);
  return spec.rabi_scale * acc;
}

// w2 = -dr/dt / 2, evaluated from the analytic derivative of the sine series.
inline double w2_scaled(const DriveSpec& spec, double tau) {
  double acc = 0.0;
  for (const Harmonic& h : spec.sine_harmonics) acc += h.coeff * h.n * std::cos(2.0 * h.n * tau);
  return -spec.rabi_scale * acc;
}

// Physical-time evaluation.  w1 and w2 come back in rad/s, r is dimensionless.

inline complexd eval_w1(const DriveSpec& spec, double t) {
  return spec.xi * w1_scaled(spec, spec.xi * t);
}

inline std::pair<double, double> eval_r_w2(const DriveSpec& spec, double t) {
  const double tau = spec.xi * t;
  return {r_scaled(spec, tau), spec.xi * w2_scaled(spec, tau)};
}

// Reference profiles.  The robust drive spreads the displacement over
// harmonics (3,5,7) with weights (1,-10/3,7/3) and shapes the squeeze on
// harmonics (2,4) with weights (1,-1/2); the quoted amplitudes solve the
// gate-phase and Rabi-stationarity conditions to four figures.  The minimal
// drive keeps one tone per stack, the ms baseline is a bare single tone with
// no squeeze.
inline DriveSpec make_profile(Profile kind, double xi) {
  DriveSpec spec;
  spec.xi = xi;
  switch (kind) {
    case Profile::robust: {
      const double a = 0.3608;
      const double s = 0.7820;
      spec.odd_harmonics = {{1, a}, {2, -10.0 * a / 3.0}, {3, 7.0 * a / 3.0}};
      spec.sine_harmonics = {{1, s}, {2, -s / 2.0}};
      break;
    }
    case Profile::minimal:
      spec.odd_harmonics = {{1, -1.1521}};
      spec.sine_harmonics = {{1, -0.8896}};
      break;
    case Profile::ms:
      spec.odd_harmonics = {{0, 0.5}};
      break;
    default:
      throw std::invalid_argument("make_profile: unknown profile");
  }
  validate(spec);
  return spec;
}

// Exact linear sum rules obeyed by the noise-insensitive family: the drive
// vanishes at the gate edges (sum a = 0, sum n s = 0) and the leading-order
// displacement closes early (sum a/(2n+1) = 0).  Pure coefficient sums, no
// quadrature; "holds" means zero up to accumulated roundoff.
struct FamilyChecks {
  double w1_endpoint_sum = 0.0;      // sum_n a_{2n+1}
  double w2_endpoint_sum = 0.0;      // sum_n n * s_{2n}
  double displacement_sum = 0.0;     // sum_n a_{2n+1} / (2n+1)
  bool w1_endpoint_zero = false;
  bool w2_endpoint_zero = false;
  bool displacement_zero = false;
};

inline FamilyChecks validate_spectral_family(const DriveSpec& spec) {
  FamilyChecks out;
  double mag_a = 0.0, mag_s = 0.0, mag_d = 0.0;
  for (const Harmonic& h : spec.odd_harmonics) {
    out.w1_endpoint_sum += h.coeff;
    out.displacement_sum += h.coeff / (2.0 * h.n + 1.0);
    mag_a += std::abs(h.coeff);
    mag_d += std::abs(h.coeff) / (2.0 * h.n + 1.0);
  }
  for (const Harmonic& h : spec.sine_harmonics) {
    out.w2_endpoint_sum += h.coeff * h.n;
    mag_s += std::abs(h.coeff) * h.n;
  }
  const double eps = std::numeric_limits<double>::epsilon();
  out.w1_endpoint_zero = std::abs(out.w1_endpoint_sum) <= 16.0 * eps * std::max(1.0, mag_a);
  out.w2_endpoint_zero = std::abs(out.w2_endpoint_sum) <= 16.0 * eps * std::max(1.0, mag_s);
  out.displacement_zero = std::abs(out.displacement_sum) <= 16.0 * eps * std::max(1.0, mag_d);
  return out;
}

// Fold the static errors into an evaluable drive: the Rabi offset rescales
// every coefficient, the timing offset only moves the integration endpoint.
struct EffectiveDrive {
  DriveSpec spec;
  double t_end = 0.0;   // effective gate end [s]
  double tau_end = 0.0; // same in scaled time
};

inline EffectiveDrive apply_error(const DriveSpec& spec, const ErrorModel& err) {
  EffectiveDrive out{spec, 0.0, 0.0};
  out.spec.rabi_scale = spec.rabi_scale * (1.0 + err.delta_omega_rel);
  out.tau_end = tau_period * (1.0 + err.delta_t_rel);
  out.t_end = out.tau_end / spec.xi;
  if (!(out.tau_end > 0.0))
    throw std::invalid_argument("apply_error: timing offset leaves no gate to run");
  return out;
}

namespace detail {

// Shortest representation that parses back to the same double; every CSV
// and console writer uses it.
inline std::string full_precision(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace detail

// JSON schema (bit-exact round trip for finite doubles):
//   { "xi_rad_per_s": x, "odd_harmonics": [[n, a], ...],
//     "sine_harmonics": [[n, s], ...], "rabi_scale": l }

inline nlohmann::ordered_json drive_to_json(const DriveSpec& spec) {
  nlohmann::ordered_json j;
  j["xi_rad_per_s"] = spec.xi;
  auto stack = [](const std::vector<Harmonic>& hs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Harmonic& h : hs) arr.push_back({h.n, h.coeff});
    return arr;
  };
  j["odd_harmonics"] = stack(spec.odd_harmonics);
  j["sine_harmonics"] = stack(spec.sine_harmonics);
  j["rabi_scale"] = spec.rabi_scale;
  return j;
}

inline std::vector<Harmonic> harmonics_from_json(const nlohmann::json& arr, const char* name) {
  if (!arr.is_array())
    throw std::invalid_argument(std::string("design file: ") + name + " must be an array");
  std::vector<Harmonic> out;
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number_integer() || !row[1].is_number())
      throw std::invalid_argument(std::string("design file: ") + name +
                                  " entries must be [integer, number] pairs");
    out.push_back({row[0].get<int>(), row[1].get<double>()});
  }
  return out;
}

inline DriveSpec drive_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("design file: top level must be an object");
  for (const char* key : {"xi_rad_per_s", "odd_harmonics", "sine_harmonics", "rabi_scale"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("design file: missing field ") + key);
  if (!j["xi_rad_per_s"].is_number() || !j["rabi_scale"].is_number())
    throw std::invalid_argument("design file: xi_rad_per_s and rabi_scale must be numbers");
  DriveSpec spec;
  spec.xi = j["xi_rad_per_s"].get<double>();
  spec.odd_harmonics = harmonics_from_json(j["odd_harmonics"], "odd_harmonics");
  spec.sine_harmonics = harmonics_from_json(j["sine_harmonics"], "sine_harmonics");
  spec.rabi_scale = j["rabi_scale"].get<double>();
  validate(spec);
  return spec;
}

} // namespace sqz
