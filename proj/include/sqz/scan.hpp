#pragma once

// Fidelity scans along one miscalibration axis plus the infidelity
// scaling-exponent fit.  Points are independent, so the scan hands them to a
// small worker pool by index; the table comes out identical whatever the
// thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sqz/fidelity.hpp"
#include "sqz/oracle.hpp"

namespace sqz {

enum class ErrorAxis { rabi, timing, detuning };

inline const char* axis_name(ErrorAxis axis) {
  switch (axis) {
    case ErrorAxis::rabi: return "rabi";
    case ErrorAxis::timing: return "timing";
    case ErrorAxis::detuning: return "detuning";
  }
  return "?";
}

inline ErrorAxis axis_from_name(const std::string& name) {
  if (name == "rabi") return ErrorAxis::rabi;
  if (name == "timing") return ErrorAxis::timing;
  if (name == "detuning") return ErrorAxis::detuning;
  throw std::invalid_argument("error axis must be rabi, timing or detuning");
}

inline ErrorModel error_on_axis(ErrorAxis axis, double value) {
  ErrorModel err;
  switch (axis) {
    case ErrorAxis::rabi: err.delta_omega_rel = value; break;
    case ErrorAxis::timing: err.delta_t_rel = value; break;
    case ErrorAxis::detuning: err.delta_nu_over_xi = value; break;
  }
  return err;
}

struct ScanPoint {
  double error_value = 0.0;
  double fidelity = 0.0;
};

struct ScanTable {
  ErrorAxis axis = ErrorAxis::rabi;
  Method method = Method::closed_form;
  std::vector<ScanPoint> points;
};

struct ScanConfig {
  // Unset method picks closed_form, except on the detuning axis where only
  // the propagator applies; an explicit closed_form there is rejected.
  std::optional<Method> method;
  double target_phase = -pi / 2.0;
  int threads = 0; // worker count; 0 = hardware concurrency
  QuadratureConfig quad{};
  FockConfig fock{};
};

inline ScanTable scan(const DriveSpec& spec, ErrorAxis axis, double lo, double hi, int n_points,
                      const ScanConfig& cfg = {}) {
  if (n_points < 2) throw std::invalid_argument("scan: need at least 2 points");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("scan: range must be finite");
  Method method = cfg.method.value_or(
      axis == ErrorAxis::detuning ? Method::oracle : Method::closed_form);
  if (axis == ErrorAxis::detuning && method == Method::closed_form)
    throw std::invalid_argument(
        "scan: the closed form assumes an on-resonance squeeze drive; use the oracle method "
        "for the detuning axis");

  ScanTable table;
  table.axis = axis;
  table.method = method;
  table.points.resize(size_t(n_points));

  auto evaluate = [&](int i) {
    const double e = lo + (hi - lo) * (double(i) / (n_points - 1));
    const ErrorModel err = error_on_axis(axis, e);
    const double f = method == Method::closed_form
                         ? closed_form_fidelity(spec, err, cfg.target_phase, cfg.quad).f
                         : numeric_fidelity(spec, err, cfg.target_phase, cfg.fock).f;
    table.points[size_t(i)] = {e, f};
  };

  int workers = cfg.threads > 0 ? cfg.threads : int(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n_points);
  if (workers == 1) {
    for (int i = 0; i < n_points; ++i) evaluate(i);
    return table;
  }

  // Index-stealing pool; on failure keep the lowest-index exception so the
  // reported error does not depend on scheduling.
  std::atomic<int> next{0};
  std::mutex guard;
  int bad_index = n_points;
  std::exception_ptr bad;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_points) return;
      try {
        evaluate(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (i < bad_index) {
          bad_index = i;
          bad = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (bad) std::rethrow_exception(bad);
  return table;
}

// Least-squares slope of log(1-F) against log(error) over a window in the
// positive-error half of a rabi or timing scan.
inline double scaling_exponent(const ScanTable& table, double window_lo, double window_hi) {
  if (table.axis == ErrorAxis::detuning)
    throw std::invalid_argument("scaling_exponent: fit applies to rabi or timing scans");
  if (!(window_lo > 0.0) || !(window_hi > window_lo))
    throw std::invalid_argument("scaling_exponent: window must sit in the positive-error half");
  std::vector<double> lx, ly;
  for (const ScanPoint& p : table.points) {
    if (p.error_value < window_lo || p.error_value > window_hi) continue;
    const double infidelity = 1.0 - p.fidelity;
    if (infidelity < 1e-14)
      throw std::runtime_error(
          "scaling_exponent: infidelity is numerically flat inside the window; widen it");
    lx.push_back(std::log(p.error_value));
    ly.push_back(std::log(infidelity));
  }
  const size_t n = lx.size();
  if (n < 2) throw std::invalid_argument("scaling_exponent: fewer than two points in the window");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

inline void write_csv(const ScanTable& table, std::ostream& out) {
  out << "error_axis,error_value,fidelity,method\n";
  for (const ScanPoint& p : table.points)
    out << axis_name(table.axis) << ',' << detail::full_precision(p.error_value) << ','
        << detail::full_precision(p.fidelity) << ',' << method_name(table.method) << '\n';
}

} // namespace sqz
