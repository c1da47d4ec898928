#pragma once

// Hardware-facing export: the drive decomposed into baseband tones per
// sideband order, tagged with the physical realization parameters.  First
// order carries the displacement stack verbatim; second order splits each
// squeeze cosine into a symmetric pair of half-amplitude tones.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/drive.hpp"

namespace sqz {

struct RealizationParams {
  double eta = 0.1;          // Lamb-Dicke parameter
  double nu = 0.0;           // motional mode frequency [Hz]
  std::string omega0_label;  // qubit transition tag, informational only
};

inline void validate(const RealizationParams& rp) {
  if (!(rp.eta > 0.0 && rp.eta < 1.0))
    throw std::invalid_argument("realization: eta must lie in (0, 1)");
  if (!(rp.nu > 0.0) || !std::isfinite(rp.nu))
    throw std::invalid_argument("realization: nu must be positive and finite");
}

enum class AmplitudeUnits { w1_units_of_xi, w2_units_of_xi };

inline const char* units_name(AmplitudeUnits u) {
  return u == AmplitudeUnits::w1_units_of_xi ? "w1_units_of_xi" : "w2_units_of_xi";
}

struct Tone {
  int sideband_order = 1;            // 1: displacement sideband, 2: squeeze sideband
  double offset_from_sideband = 0.0; // [rad/s], signed multiple of xi
  double amplitude = 0.0;            // in units of xi, per `units`

  AmplitudeUnits units = AmplitudeUnits::w1_units_of_xi;
};

struct ToneList {
  RealizationParams realization;
  double xi = 1.0; // [rad/s], for converting offsets back to harmonics
  std::vector<Tone> tones;
};

inline ToneList export_tones(const DriveSpec& spec, const RealizationParams& rp) {
  validate(spec);
  validate(rp);
  ToneList out;
  out.realization = rp;
  out.xi = spec.xi;
  for (const Harmonic& h : spec.odd_harmonics)
    out.tones.push_back({1, (2.0 * h.n + 1.0) * spec.xi, spec.rabi_scale * h.coeff,
                         AmplitudeUnits::w1_units_of_xi});
  for (const Harmonic& h : spec.sine_harmonics) {
    // w2 = -rabi_scale sum_n coeff n cos(2 n xi t); each cosine is a pair of
    // conjugate tones at +-2 n xi with half the coefficient each.
    const double amp = -0.5 * spec.rabi_scale * h.coeff * h.n;
    out.tones.push_back({2, -2.0 * h.n * spec.xi, amp, AmplitudeUnits::w2_units_of_xi});
    out.tones.push_back({2, +2.0 * h.n * spec.xi, amp, AmplitudeUnits::w2_units_of_xi});
  }
  std::sort(out.tones.begin(), out.tones.end(), [](const Tone& x, const Tone& y) {
    if (x.sideband_order != y.sideband_order) return x.sideband_order < y.sideband_order;
    return x.offset_from_sideband < y.offset_from_sideband;
  });
  return out;
}

// Rebuild the scaled drive envelopes from the tone list; matches w1_scaled
// and w2_scaled to roundoff by construction, which the tests pin down.

inline complexd reconstruct_w1(const ToneList& tl, double tau) {
  complexd acc = 0.0;
  for (const Tone& t : tl.tones)
    if (t.sideband_order == 1) acc += t.amplitude * std::polar(1.0, t.offset_from_sideband / tl.xi * tau);
  return acc;
}

inline complexd reconstruct_w2(const ToneList& tl, double tau) {
  complexd acc = 0.0;
  for (const Tone& t : tl.tones)
    if (t.sideband_order == 2) acc += t.amplitude * std::polar(1.0, t.offset_from_sideband / tl.xi * tau);
  return acc;
}

inline nlohmann::ordered_json tones_to_json(const ToneList& tl) {
  nlohmann::ordered_json j;
  j["eta"] = tl.realization.eta;
  j["nu_hz"] = tl.realization.nu;
  if (!tl.realization.omega0_label.empty()) j["omega0_label"] = tl.realization.omega0_label;
  j["xi_rad_per_s"] = tl.xi;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Tone& t : tl.tones) {
    nlohmann::ordered_json row;
    row["sideband_order"] = t.sideband_order;
    row["offset_from_sideband_rad_per_s"] = t.offset_from_sideband;
    row["amplitude"] = t.amplitude;
    row["units"] = units_name(t.units);
    arr.push_back(row);
  }
  j["tones"] = arr;
  return j;
}

} // namespace sqz
