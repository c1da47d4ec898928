#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "sqz/drive.hpp"
#include "test_helpers.hpp"

using namespace sqz;
using Catch::Approx;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

} // namespace

TEST_CASE("reference profiles", "[drive]") {
  const DriveSpec robust = make_profile(Profile::robust, 2.0 * pi * 1e4);
  REQUIRE(robust.odd_harmonics.size() == 3);
  REQUIRE(robust.sine_harmonics.size() == 2);
  const DriveSpec minimal = make_profile(Profile::minimal, 1.0);
  REQUIRE(minimal.odd_harmonics.size() == 1);
  REQUIRE(minimal.odd_harmonics[0].coeff == Approx(-1.1521));
  REQUIRE(minimal.sine_harmonics[0].coeff == Approx(-0.8896));
  const DriveSpec ms = make_profile(Profile::ms, 1.0);
  REQUIRE(ms.odd_harmonics.size() == 1);
  REQUIRE(ms.odd_harmonics[0].n == 0);
  REQUIRE(ms.odd_harmonics[0].coeff == 0.5);
  REQUIRE(ms.sine_harmonics.empty());
}

TEST_CASE("family sum rules", "[drive]") {
  const FamilyChecks robust = validate_spectral_family(make_profile(Profile::robust, 1.0));
  REQUIRE(robust.w1_endpoint_zero);
  REQUIRE(robust.w2_endpoint_zero);
  REQUIRE(robust.displacement_zero);

  // The bare single tone fails the endpoint and early-closure rules; its
  // empty squeeze stack passes the w2 rule vacuously.
  const FamilyChecks ms = validate_spectral_family(make_profile(Profile::ms, 1.0));
  REQUIRE_FALSE(ms.w1_endpoint_zero);
  REQUIRE_FALSE(ms.displacement_zero);
  REQUIRE(ms.w2_endpoint_zero);

  const FamilyChecks minimal = validate_spectral_family(make_profile(Profile::minimal, 1.0));
  REQUIRE_FALSE(minimal.w1_endpoint_zero);
  REQUIRE_FALSE(minimal.w2_endpoint_zero);
}

TEST_CASE("pointwise evaluation", "[drive]") {
  const DriveSpec robust = make_profile(Profile::robust, 1.0);
  REQUIRE(std::abs(eval_w1(robust, 0.0)) < 1e-12);          // edges vanish: 3 - 10 + 7 = 0
  REQUIRE(std::abs(eval_r_w2(robust, 0.0).second) < 1e-12); // sine sum rule: 1 - 2*1/2 = 0

  DriveSpec tone;
  tone.xi = 1.0;
  tone.odd_harmonics = {{1, 1.0}}; // harmonic 3
  const complexd w = eval_w1(tone, tau_period / 6.0);
  REQUIRE(w.real() == Approx(-1.0).margin(1e-12)); // e^{i pi}
  REQUIRE(std::abs(w.imag()) < 1e-12);

  const double s = 0.7820;
  REQUIRE(eval_r_w2(robust, tau_period / 8.0).first == Approx(s).margin(1e-12));

  const DriveSpec ms = make_profile(Profile::ms, 1.0);
  for (double t : {0.1, 1.7, 4.4}) REQUIRE(std::abs(eval_w1(ms, t)) == Approx(0.5));
}

TEST_CASE("drive symmetries over the family", "[drive]") {
  std::mt19937_64 rng(17u);
  std::uniform_real_distribution<double> pick(0.0, tau_period);
  for (int spec_idx = 0; spec_idx < 5; ++spec_idx) {
    const DriveSpec spec =
        spec_idx == 0 ? make_profile(Profile::robust, 1.0) : testing::random_family_spec(rng);
    const double T = period(spec);
    for (int i = 0; i < 200; ++i) {
      const double t = pick(rng);
      const complexd w1 = eval_w1(spec, t);
      REQUIRE(std::abs(eval_w1(spec, T - t) - std::conj(w1)) < 1e-10);
      REQUIRE(std::abs(eval_w1(spec, t + T / 2.0) + w1) < 1e-10);
      const double r = eval_r_w2(spec, t).first;
      REQUIRE(eval_r_w2(spec, T - t).first == Approx(-r).margin(1e-10));
      REQUIRE(eval_r_w2(spec, t + T / 2.0).first == Approx(r).margin(1e-10));
    }
  }
}

TEST_CASE("w2 matches the derivative of r", "[drive]") {
  std::mt19937_64 rng(99u);
  const DriveSpec spec = testing::random_family_spec(rng);
  const double h = 1e-6;
  for (double t : {0.3, 1.1, 2.9, 5.0}) {
    const double rp = eval_r_w2(spec, t + h).first;
    const double rm = eval_r_w2(spec, t - h).first;
    const double drdt = (rp - rm) / (2.0 * h);
    REQUIRE(eval_r_w2(spec, t).second == Approx(-0.5 * drdt).margin(1e-8));
  }
}

TEST_CASE("error model folds into scale and endpoint", "[drive]") {
  const DriveSpec spec = make_profile(Profile::robust, 2.0);
  ErrorModel err;
  err.delta_omega_rel = 0.05;
  err.delta_t_rel = -0.02;
  err.delta_nu_over_xi = 0.3; // intentionally ignored here
  const EffectiveDrive eff = apply_error(spec, err);
  REQUIRE(eff.spec.rabi_scale == Approx(1.05));
  REQUIRE(eff.spec.odd_harmonics == spec.odd_harmonics); // coefficients untouched
  REQUIRE(eff.tau_end == Approx(tau_period * 0.98));
  REQUIRE(eff.t_end == Approx(tau_period * 0.98 / 2.0));

  // Composition of two Rabi offsets is multiplicative in the scale.
  ErrorModel more;
  more.delta_omega_rel = 0.02;
  const EffectiveDrive twice = apply_error(eff.spec, more);
  REQUIRE(twice.spec.rabi_scale == Approx(1.05 * 1.02));

  ErrorModel fatal;
  fatal.delta_t_rel = -1.0;
  REQUIRE_THROWS_AS(apply_error(spec, fatal), std::invalid_argument);
}

TEST_CASE("json round trip is bit exact", "[drive]") {
  DriveSpec spec;
  spec.xi = 1.2345678912345e5;
  spec.odd_harmonics = {{0, 0.1}, {1, -1.0 / 3.0}, {7, 1e-300}};
  spec.sine_harmonics = {{2, 0.7820000000000001}};
  spec.rabi_scale = 1.0 + 1e-15;
  const std::string text = drive_to_json(spec).dump();
  const DriveSpec back = drive_from_json(nlohmann::json::parse(text));
  REQUIRE(same_bits(back.xi, spec.xi));
  REQUIRE(same_bits(back.rabi_scale, spec.rabi_scale));
  REQUIRE(back.odd_harmonics.size() == spec.odd_harmonics.size());
  for (size_t i = 0; i < spec.odd_harmonics.size(); ++i) {
    REQUIRE(back.odd_harmonics[i].n == spec.odd_harmonics[i].n);
    REQUIRE(same_bits(back.odd_harmonics[i].coeff, spec.odd_harmonics[i].coeff));
  }
  REQUIRE(same_bits(back.sine_harmonics[0].coeff, spec.sine_harmonics[0].coeff));
}

TEST_CASE("malformed drive files are rejected", "[drive]") {
  auto parse = [](const char* text) { return drive_from_json(nlohmann::json::parse(text)); };
  // missing field
  REQUIRE_THROWS_AS(parse(R"({"xi_rad_per_s": 1.0, "odd_harmonics": [], "sine_harmonics": []})"),
                    std::invalid_argument);
  // wrong types
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": "fast", "odd_harmonics": [], "sine_harmonics": [], "rabi_scale": 1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": 1.0, "odd_harmonics": [[0.5, 1]], "sine_harmonics": [], "rabi_scale": 1})"),
      std::invalid_argument);
  // domain violations
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": -1.0, "odd_harmonics": [], "sine_harmonics": [], "rabi_scale": 1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": 1.0, "odd_harmonics": [[1, 0.2], [1, 0.3]], "sine_harmonics": [], "rabi_scale": 1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": 1.0, "odd_harmonics": [[65, 0.2]], "sine_harmonics": [], "rabi_scale": 1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": 1.0, "odd_harmonics": [], "sine_harmonics": [[0, 0.2]], "rabi_scale": 1})"),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse(
          R"({"xi_rad_per_s": 1.0, "odd_harmonics": [], "sine_harmonics": [], "rabi_scale": 0.0})"),
      std::invalid_argument);
}
