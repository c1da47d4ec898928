#pragma once

// Composite Gauss-Legendre quadrature on [0, tau_end] in scaled time, with a
// panel-doubling convergence certificate, plus the nested time-ordered
// integral {f{g}}(t) = int_0^t dt1 f(t1) int_0^t1 dt2 g(t2) that every phase
// functional reduces to.  The inner antiderivative is materialised at the
// outer nodes through exact per-panel polynomial integration (Legendre
// expansion of the interpolant), so a nested integral costs the same O(N)
// sweep as a plain one.

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqz/drive.hpp"

namespace sqz {

struct QuadratureConfig {
  int panels_per_period = 64; // composite panels per 2*pi of scaled time
  int nodes_per_panel = 16;   // Gauss-Legendre nodes per panel
  double abs_tol = 1e-12;     // certificate: doubling panels moves results less
  int max_refinements = 6;    // doublings attempted before giving up
};

inline void validate(const QuadratureConfig& cfg) {
  if (cfg.panels_per_period < 8)
    throw std::invalid_argument("quadrature: need at least 8 panels per period");
  if (cfg.nodes_per_panel < 2 || cfg.nodes_per_panel > 64)
    throw std::invalid_argument("quadrature: nodes_per_panel out of range [2, 64]");
  if (!(cfg.abs_tol > 0.0)) throw std::invalid_argument("quadrature: abs_tol must be positive");
  if (cfg.max_refinements < 1 || cfg.max_refinements > 12)
    throw std::invalid_argument("quadrature: max_refinements out of range [1, 12]");
}

// Thrown when panel doubling stops improving the result before reaching
// abs_tol; carries the last two estimates so the caller can see how far apart
// they remained.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, complexd coarse, complexd fine)
      : std::runtime_error(what), coarse_estimate(coarse), fine_estimate(fine) {}
  complexd coarse_estimate;
  complexd fine_estimate;
};

// Nodes/weights on [-1, 1] and the cumulative matrix C with
// int_{-1}^{x_j} p(x) dx = sum_i C[j*K+i] f(x_i) for the degree-(K-1)
// interpolant p of f.
struct GaussTable {
  int k = 0;
  std::vector<double> node;
  std::vector<double> weight;
  std::vector<double> cumulative; // row j: integral weights up to node j
};

namespace detail {

// Legendre polynomial value and derivative by upward recurrence.
inline std::pair<double, double> legendre(int l, double x) {
  double p0 = 1.0, p1 = x;
  if (l == 0) return {1.0, 0.0};
  for (int m = 2; m <= l; ++m) {
    const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
    p0 = p1;
    p1 = p2;
  }
  const double dp = l * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline GaussTable build_gauss_table(int k) {
  GaussTable t;
  t.k = k;
  t.node.resize(k);
  t.weight.resize(k);
  // Newton iteration from the Chebyshev-like initial guess.
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (k + 0.5));
    for (int iter = 0; iter < 64; ++iter) {
      auto [p, dp] = legendre(k, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(k, x);
    (void)p;
    t.node[i] = -x;
    t.node[k - 1 - i] = x;
    t.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    t.weight[k - 1 - i] = t.weight[i];
  }
  if (k % 2 == 1) t.node[k / 2] = 0.0;

  // Cumulative weights.  Expand the interpolant in Legendre polynomials,
  //   c_l = (2l+1)/2 sum_i w_i f_i P_l(x_i)            (exact for deg <= K-1),
  // and integrate each P_l in closed form:
  //   int_{-1}^{y} P_0 = y + 1,
  //   int_{-1}^{y} P_l = (P_{l+1}(y) - P_{l-1}(y)) / (2l+1)   for l >= 1.
  t.cumulative.assign(static_cast<size_t>(k) * k, 0.0);
  for (int j = 0; j < k; ++j) {
    const double y = t.node[j];
    for (int i = 0; i < k; ++i) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        const double pl_xi = legendre(l, t.node[i]).first;
        double ql;
        if (l == 0) {
          ql = y + 1.0;
        } else {
          ql = (legendre(l + 1, y).first - legendre(l - 1, y).first) / (2.0 * l + 1.0);
        }
        acc += (2.0 * l + 1.0) / 2.0 * pl_xi * ql;
      }
      t.cumulative[static_cast<size_t>(j) * k + i] = t.weight[i] * acc;
    }
  }
  return t;
}

inline const GaussTable& gauss_table(int k) {
  static std::map<int, GaussTable> cache;
  static std::mutex guard;
  std::lock_guard<std::mutex> lock(guard);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_gauss_table(k)).first;
  return it->second;
}

inline int panel_count(double tau_end, const QuadratureConfig& cfg, int doublings) {
  const double per = cfg.panels_per_period * std::abs(tau_end) / tau_period;
  int n = static_cast<int>(std::ceil(per));
  if (n < 1) n = 1;
  return n << doublings;
}

} // namespace detail

// Plain integral int_0^tau_end f(tau) dtau with fixed panel count.
template <class F>
complexd integrate_fixed(F&& f, double tau_end, int panels, const GaussTable& t) {
  const double h = tau_end / panels;
  complexd total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    complexd acc = 0.0;
    for (int i = 0; i < t.k; ++i) acc += t.weight[i] * complexd(f(mid + 0.5 * h * t.node[i]));
    total += 0.5 * h * acc;
  }
  return total;
}

// Nested integral {f{g}} with fixed panel count: one sweep that carries the
// running antiderivative of g across panels.
template <class F, class G>
complexd nested_fixed(F&& f, G&& g, double tau_end, int panels, const GaussTable& t) {
  const int k = t.k;
  const double h = tau_end / panels;
  std::vector<complexd> gval(k);
  complexd total = 0.0;
  complexd g_prefix = 0.0; // int_0^{panel start} g
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int i = 0; i < k; ++i) gval[i] = complexd(g(mid + 0.5 * h * t.node[i]));
    complexd acc = 0.0, panel_g = 0.0;
    for (int j = 0; j < k; ++j) {
      complexd cum = 0.0;
      for (int i = 0; i < k; ++i) cum += t.cumulative[static_cast<size_t>(j) * k + i] * gval[i];
      const complexd g_at_node = g_prefix + 0.5 * h * cum;
      acc += t.weight[j] * complexd(f(mid + 0.5 * h * t.node[j])) * g_at_node;
      panel_g += t.weight[j] * gval[j];
    }
    total += 0.5 * h * acc;
    g_prefix += 0.5 * h * panel_g;
  }
  return total;
}

struct IntegrationResult {
  complexd value;
  double certificate = 0.0; // |last refinement step|, the error estimate
  int panels = 0;
};

namespace detail {

template <class Eval>
IntegrationResult certified(Eval&& eval, double tau_end, const QuadratureConfig& cfg,
                            const char* what) {
  validate(cfg);
  complexd coarse = 0.0;
  complexd fine = eval(panel_count(tau_end, cfg, 0));
  for (int d = 1; d <= cfg.max_refinements; ++d) {
    coarse = fine;
    fine = eval(panel_count(tau_end, cfg, d));
    const double diff = std::abs(fine - coarse);
    if (diff <= cfg.abs_tol) return {fine, diff, panel_count(tau_end, cfg, d)};
  }
  throw convergence_error(std::string(what) + ": panel refinement did not reach abs_tol", coarse,
                          fine);
}

} // namespace detail

// Certified integral of a complex- or real-valued integrand over [0, tau_end].
template <class F>
IntegrationResult integrate(F&& f, double tau_end, const QuadratureConfig& cfg = {}) {
  const GaussTable& t = detail::gauss_table(cfg.nodes_per_panel);
  return detail::certified([&](int p) { return integrate_fixed(f, tau_end, p, t); }, tau_end,
                           cfg, "integrate");
}

// Certified nested integral {f{g}} over [0, tau_end].
template <class F, class G>
IntegrationResult nested_integrate(F&& f, G&& g, double tau_end, const QuadratureConfig& cfg = {}) {
  const GaussTable& t = detail::gauss_table(cfg.nodes_per_panel);
  return detail::certified([&](int p) { return nested_fixed(f, g, tau_end, p, t); }, tau_end,
                           cfg, "nested_integrate");
}

} // namespace sqz
