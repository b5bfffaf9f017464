#include "wdec/morlet.hpp"

#include <cmath>
#include <numbers>

#include "wdec/error.hpp"

namespace wdec {

void MorletParams::validate() const {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate", "must be positive");
  if (!(frequency > 0.0 && frequency < sample_rate / 2.0))
    throw ConfigError("frequency", "central frequency " + std::to_string(frequency) + " Hz outside (0, " +
                                       std::to_string(sample_rate / 2.0) + ")");
  if (support == 0 || support % 2 != 0) throw ConfigError("support", "must be even and positive");
}

std::vector<std::complex<double>> morlet_coefficients(const MorletParams& params) {
  params.validate();
  const double f = params.frequency;
  const double amplitude = 1.0 / std::sqrt(std::numbers::pi) / std::sqrt(params.sample_rate / f);
  const double center = static_cast<double>(params.support / 2);
  std::vector<std::complex<double>> out(params.support);
  for (std::size_t n = 0; n < params.support; ++n) {
    const double t = (static_cast<double>(n) - center) / params.sample_rate;
    const double envelope = amplitude * std::exp(-(t * f) * (t * f));
    const double phase = 2.0 * std::numbers::pi * t * f;
    out[n] = {envelope * std::cos(phase), envelope * std::sin(phase)};
  }
  return out;
}

std::vector<std::complex<double>> morlet_frequency_derivative(const MorletParams& params) {
  auto psi = morlet_coefficients(params);
  const double f = params.frequency;
  const double center = static_cast<double>(params.support / 2);
  for (std::size_t n = 0; n < params.support; ++n) {
    const double t = (static_cast<double>(n) - center) / params.sample_rate;
    // d/df log psi = 1/(2f) - 2 t^2 f + 2 i pi t
    const std::complex<double> dlog(1.0 / (2.0 * f) - 2.0 * t * t * f, 2.0 * std::numbers::pi * t);
    psi[n] *= dlog;
  }
  return psi;
}

}  // namespace wdec
