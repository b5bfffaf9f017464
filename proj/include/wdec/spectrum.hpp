#pragma once

#include <span>
#include <vector>

namespace wdec {

struct PowerSpectrum {
  std::vector<double> frequencies_hz;
  std::vector<double> power;  // |DFT|^2 per bin
  double peak_hz = 0.0;
};

// DFT of a real kernel zero-padded to at least `min_points` (power of two).
// Throws NumericError for an all-zero kernel.
PowerSpectrum power_spectrum(std::span<const double> kernel, double sample_rate = 586.0,
                             std::size_t min_points = 1024);

}  // namespace wdec
