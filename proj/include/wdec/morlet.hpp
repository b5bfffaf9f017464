#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace wdec {

inline constexpr std::size_t kMorletSupport = 118;
inline constexpr std::size_t kMorletCenterTap = 59;

struct MorletParams {
  double frequency = 10.0;      // Hz
  double sample_rate = 586.0;   // Hz
  std::size_t support = kMorletSupport;

  void validate() const;
};

// psi(t, f) = pi^-1/2 * (f_s / f)^-1/2 * exp(-(t f)^2) * exp(2 i pi t f),
// sampled at t_n = (n - support/2) / f_s so the maximum sits on tap support/2.
std::vector<std::complex<double>> morlet_coefficients(const MorletParams& params);

// Element-wise d psi / d f at the same taps.
std::vector<std::complex<double>> morlet_frequency_derivative(const MorletParams& params);

}  // namespace wdec
