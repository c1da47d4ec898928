#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "sqz/designer.hpp"

using namespace sqz;
using Catch::Approx;

TEST_CASE("series seed solves its own polynomial system", "[designer]") {
  const SeedSolution seed = solve_expanded();
  REQUIRE(seed.a == Approx(0.364172).margin(1e-5));
  REQUIRE(seed.s == Approx(0.801322).margin(1e-5));
  const double u = seed.s * seed.s;
  REQUIRE(std::abs(71582.0 * u * u + 70954.0 * u - 75075.0) < 1e-6);
  const double phase = 4.0 * pi * seed.a * seed.a / 135135.0 *
                       (71582.0 * u * u + 106431.0 * u - 225225.0);
  REQUIRE(phase == Approx(-pi / 2.0).epsilon(1e-12));
  // No real amplitude exists for a positive target.
  REQUIRE_THROWS_AS(solve_expanded(pi / 2.0), std::invalid_argument);
}

TEST_CASE("series phase matches the integrals at small amplitude", "[designer]") {
  // The seed polynomials truncate at sixth order; at small (a, s) they must
  // agree with the full functionals, with error shrinking like s^6.
  auto series_phase = [](double a, double s) {
    const double u = s * s;
    return 4.0 * pi * a * a / 135135.0 * (71582.0 * u * u + 106431.0 * u - 225225.0);
  };
  auto series_slope = [](double a, double s) {
    const double u = s * s;
    return 8.0 * pi * a * a / 45045.0 * (214746.0 * u * u + 212862.0 * u - 225225.0) / 3.0;
  };
  const double a = 0.05;
  for (auto [s, margin] : {std::pair{0.0, 1e-12}, {0.15, 2e-7}, {0.3, 2e-5}}) {
    const DriveSpec spec = template_spec(DesignTemplate::robust, 1.0, a, s);
    const auto sums = detail::sweep(spec, tau_period, QuadratureConfig{});
    REQUIRE(sums.phi2 + sums.phi4 == Approx(series_phase(a, s)).margin(margin));
    REQUIRE(rabi_stationarity_residual(spec) == Approx(series_slope(a, s)).margin(4.0 * margin));
  }
}

TEST_CASE("robust template refines onto the reference point", "[designer]") {
  const GateDesign d = design_gate(Profile::robust, 1.0);
  REQUIRE(d.refined.a == Approx(0.3608).margin(5e-4));
  REQUIRE(d.refined.s == Approx(0.7820).margin(5e-4));
  // Refinement is a small correction of the series seed.
  REQUIRE(std::abs(d.refined.a - d.seed.a) < 0.1 * d.seed.a);
  REQUIRE(std::abs(d.refined.s - d.seed.s) < 0.1 * d.seed.s);
  REQUIRE(std::abs(d.residuals.c1) < 1e-8);
  REQUIRE(std::abs(d.residuals.c2) < 1e-8);
  REQUIRE(std::abs(d.residuals.c3) < 1e-8);
  REQUIRE(std::abs(d.residuals.c4) < 1e-8);
  REQUIRE(std::abs(d.residuals.c5) < 1e-6);
  REQUIRE(std::abs(d.residuals.c6) < 1e-4);
  REQUIRE(d.iterations > 0);
}

TEST_CASE("minimal template refines onto the reference point", "[designer]") {
  const GateDesign d = design_gate(Profile::minimal, 1.0);
  REQUIRE(d.refined.a == Approx(1.1521).margin(1e-3));
  REQUIRE(d.refined.s == Approx(0.8896).margin(1e-3));
  REQUIRE(std::abs(d.residuals.c5) < 1e-6);
  REQUIRE(std::abs(d.residuals.c6) < 1e-4);
}

TEST_CASE("seed is already close to the target phase", "[designer]") {
  const SeedSolution seed = solve_expanded();
  const DriveSpec spec = template_spec(DesignTemplate::robust, 1.0, seed.a, seed.s);
  const ConstraintResiduals r = constraint_residuals(spec, -pi / 2.0);
  REQUIRE(std::abs(r.c5) < 0.06);
  REQUIRE(std::abs(r.c6) < 0.5);
}

TEST_CASE("single-tone amplitude closed form", "[designer]") {
  REQUIRE(ms_amplitude(1.0) == Approx(0.5).epsilon(1e-15));
  REQUIRE(ms_amplitude(2.0) == Approx(1.0).epsilon(1e-15));
  REQUIRE(ms_amplitude(1.0, -pi / 8.0) == Approx(0.25).epsilon(1e-15));
  REQUIRE_THROWS_AS(ms_amplitude(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ms_amplitude(1.0, 0.1), std::invalid_argument);
  const GateDesign d = design_gate(Profile::ms, 1.0);
  REQUIRE(d.iterations == 0);
  REQUIRE(d.refined.a == Approx(0.5).epsilon(1e-15));
  REQUIRE(d.refined.s == 0.0);
  REQUIRE(std::abs(d.residuals.c5) < 1e-10);
}

TEST_CASE("template wiring matches the explicit waveforms", "[designer]") {
  const double a = 0.41, s = 0.63;
  const DriveSpec spec = template_spec(DesignTemplate::robust, 1.0, a, s);
  for (double tau : {0.3, 1.7, 4.2}) {
    const complexd e3{std::cos(3 * tau), std::sin(3 * tau)};
    const complexd e5{std::cos(5 * tau), std::sin(5 * tau)};
    const complexd e7{std::cos(7 * tau), std::sin(7 * tau)};
    REQUIRE(std::abs(w1_scaled(spec, tau) - a / 3.0 * (3.0 * e3 - 10.0 * e5 + 7.0 * e7)) < 1e-14);
    REQUIRE(r_scaled(spec, tau) ==
            Approx(s * (std::sin(2 * tau) - 0.5 * std::sin(4 * tau))).margin(1e-14));
  }
  const DriveSpec min_spec = template_spec(DesignTemplate::minimal, 2.0, a, s);
  REQUIRE(min_spec.xi == 2.0);
  REQUIRE(std::abs(w1_scaled(min_spec, 1.0) - a * complexd{std::cos(3.0), std::sin(3.0)}) < 1e-14);
  REQUIRE(r_scaled(min_spec, 1.0) == Approx(s * std::sin(2.0)).margin(1e-14));
}

TEST_CASE("drive strength requirements", "[designer]") {
  const double eta = 0.144;
  SECTION("three-tone design") {
    const GateDesign d = design_gate(Profile::robust, 1.0);
    const RabiEstimate est = rabi_estimate(d.spec, eta);
    // Peak of |3 e^{3i tau} - 10 e^{5i tau} + 7 e^{7i tau}| is 20, at tau = pi/2.
    REQUIRE(est.omega_first == Approx(40.0 * d.refined.a / 3.0).epsilon(1e-8));
    REQUIRE(est.omega_second == Approx(4.0 * d.refined.s).epsilon(1e-8));
    REQUIRE(est.omega_total_over_xi ==
            Approx(0.5 * (est.omega_first / eta + est.omega_second / (eta * eta))).epsilon(1e-12));
  }
  SECTION("two-tone design") {
    const GateDesign d = design_gate(Profile::minimal, 1.0);
    const RabiEstimate est = rabi_estimate(d.spec, eta);
    REQUIRE(est.omega_first == Approx(2.3042).margin(2e-3));
    REQUIRE(est.omega_second == Approx(1.7792).margin(2e-3));
  }
  SECTION("single tone is the unit of comparison") {
    const GateDesign d = design_gate(Profile::ms, 1.0);
    const RabiEstimate est = rabi_estimate(d.spec, eta);
    REQUIRE(est.ratio_to_ms == Approx(1.0).margin(1e-12));
    REQUIRE(est.omega_second == 0.0);
  }
  SECTION("domain") {
    const DriveSpec spec = make_profile(Profile::ms, 1.0);
    REQUIRE_THROWS_AS(rabi_estimate(spec, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rabi_estimate(spec, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(rabi_estimate(spec, -0.2), std::invalid_argument);
  }
}

TEST_CASE("design survives a JSON round trip", "[designer]") {
  const GateDesign d = design_gate(Profile::robust, 2.0e6 * pi);
  const nlohmann::ordered_json j = design_to_json(d);
  const LoadedDesign back = design_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.spec == d.spec);
  REQUIRE(back.target_phase == d.target_phase);
  REQUIRE(j.at("refined").at(0).get<double>() == d.refined.a);
  REQUIRE(j.at("residuals").at("c5").get<double>() == d.residuals.c5);
}
