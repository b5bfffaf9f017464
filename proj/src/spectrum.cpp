#include "wdec/spectrum.hpp"

#include <algorithm>
#include <bit>

#include "wdec/error.hpp"
#include "wdec/fft.hpp"

namespace wdec {

PowerSpectrum power_spectrum(std::span<const double> kernel, double sample_rate, std::size_t min_points) {
  if (kernel.empty() || std::all_of(kernel.begin(), kernel.end(), [](double v) { return v == 0.0; }))
    throw NumericError("kernel", "all-zero kernel has no spectral peak");
  const std::size_t n = std::bit_ceil(std::max(min_points, kernel.size()));
  RealFft fft(n);
  auto r = fft.real();
  std::fill(r.begin(), r.end(), 0.0);
  std::copy(kernel.begin(), kernel.end(), r.begin());
  fft.forward();

  PowerSpectrum out;
  const auto spec = fft.spectrum();
  out.power.resize(spec.size());
  out.frequencies_hz.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.power[k] = std::norm(spec[k]);
    out.frequencies_hz[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n);
  }
  const auto peak = std::max_element(out.power.begin(), out.power.end()) - out.power.begin();
  out.peak_hz = out.frequencies_hz[static_cast<std::size_t>(peak)];
  return out;
}

}  // namespace wdec
