#include <cmath>
#include <numbers>

#include "doctest.h"

#include "wdec/error.hpp"
#include "wdec/morlet.hpp"
#include "wdec/spectrum.hpp"

using namespace wdec;

TEST_CASE("morlet coefficients") {
  MorletParams p{10.0, 586.0};
  auto psi = morlet_coefficients(p);
  REQUIRE(psi.size() == 118);

  CHECK(psi[59].imag() == 0.0);
  // (1/sqrt(pi)) * (586/10)^-1/2
  CHECK(psi[59].real() == doctest::Approx(0.0737).epsilon(1e-3));
  CHECK(psi[59].real() == doctest::Approx(1.0 / std::sqrt(std::numbers::pi) / std::sqrt(58.6)).epsilon(1e-12));

  for (std::size_t n = 0; n < psi.size(); ++n) CHECK(std::abs(psi[n]) <= std::abs(psi[59]));

  // Taps 59 +/- m share |t|: real part even, imaginary part odd.
  for (std::size_t m = 1; m <= 58; ++m) {
    CHECK(psi[59 + m].real() == psi[59 - m].real());
    CHECK(psi[59 + m].imag() == -psi[59 - m].imag());
  }
}

TEST_CASE("morlet validation") {
  CHECK_THROWS_AS(morlet_coefficients({0.0, 586.0}), ConfigError);
  CHECK_THROWS_AS(morlet_coefficients({-5.0, 586.0}), ConfigError);
  CHECK_THROWS_AS(morlet_coefficients({293.0, 586.0}), ConfigError);
  CHECK_THROWS_AS(morlet_coefficients({50.0, 586.0, 117}), ConfigError);
  CHECK_NOTHROW(morlet_coefficients({292.0, 586.0}));
}

TEST_CASE("morlet frequency derivative matches finite differences") {
  for (double f : {10.0, 47.3, 150.0}) {
    auto d = morlet_frequency_derivative({f, 586.0});
    const double h = 1e-4;
    auto up = morlet_coefficients({f + h, 586.0});
    auto dn = morlet_coefficients({f - h, 586.0});
    for (std::size_t n = 0; n < d.size(); ++n) {
      auto fd = (up[n] - dn[n]) / (2 * h);
      CHECK(std::abs(fd - d[n]) <= 1e-6 * (1.0 + std::abs(d[n])));
    }
  }
}

TEST_CASE("power spectrum peaks") {
  auto psi = morlet_coefficients({50.0, 586.0});
  std::vector<double> re(psi.size());
  for (std::size_t n = 0; n < psi.size(); ++n) re[n] = psi[n].real();
  auto s = power_spectrum(re);
  CHECK(s.power.size() >= 513);
  CHECK(std::abs(s.peak_hz - 50.0) <= 586.0 / 1024.0);

  std::vector<double> scaled(re);
  for (auto& v : scaled) v *= 37.5;
  CHECK(power_spectrum(scaled).peak_hz == s.peak_hz);

  std::vector<double> dc(118, 1.0);
  CHECK(power_spectrum(dc).peak_hz == 0.0);

  std::vector<double> zero(118, 0.0);
  CHECK_THROWS_AS(power_spectrum(zero), NumericError);
}
