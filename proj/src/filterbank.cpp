#include "wdec/filterbank.hpp"

#include <algorithm>
#include <cmath>

#include "wdec/error.hpp"
#include "wdec/random.hpp"

namespace wdec {

std::string to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::fixed: return "fixed";
    case FilterMode::free: return "free";
    case FilterMode::random: return "random";
    case FilterMode::cfo: return "cfo";
  }
  return "?";
}

FilterMode filter_mode_from_string(const std::string& name) {
  if (name == "fixed") return FilterMode::fixed;
  if (name == "free") return FilterMode::free;
  if (name == "random") return FilterMode::random;
  if (name == "cfo") return FilterMode::cfo;
  throw ConfigError("filter_mode", "unknown filter mode '" + name + "'");
}

std::vector<double> default_frequencies() {
  std::vector<double> f(kBands);
  for (std::size_t j = 0; j < kBands; ++j) f[j] = 10.0 * static_cast<double>(j + 1);
  return f;
}

Filterbank::Filterbank(FilterMode mode, double sample_rate, std::uint64_t seed,
                       std::optional<std::vector<double>> frequencies, bool squeeze)
    : mode_(mode),
      sample_rate_(sample_rate),
      squeeze_(squeeze && mode == FilterMode::cfo),
      kernels_("frontend.kernels", ParamKind::weight, kKernels, kMorletSupport),
      bias_("frontend.bias", ParamKind::bias, kKernels),
      centre_("frontend.frequencies", ParamKind::frequency, kBands) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate", "must be positive");
  const auto hz = frequencies.value_or(default_frequencies());
  if (hz.size() != kBands) throw ConfigError("frequencies", "expected 15 central frequencies");
  set_frequencies(hz);

  if (mode_ == FilterMode::random) {
    Rng rng(derive_seed(seed, {0x6b65726eULL}));
    const double bound = 1.0 / std::sqrt(static_cast<double>(kMorletSupport));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : kernels_.value) v = u(rng);
  } else {
    fill_morlets();
  }
}

double Filterbank::frequency(std::size_t band) const {
  const double v = centre_.value.at(band);
  return squeeze_ ? kSqueezeLow + kSqueezeRange * v : v;
}

std::vector<double> Filterbank::frequencies() const {
  std::vector<double> f(kBands);
  for (std::size_t j = 0; j < kBands; ++j) f[j] = frequency(j);
  return f;
}

void Filterbank::set_frequencies(const std::vector<double>& hz) {
  if (hz.size() != kBands) throw ConfigError("frequencies", "expected 15 central frequencies");
  for (std::size_t j = 0; j < kBands; ++j) {
    MorletParams{hz[j], sample_rate_}.validate();
    centre_.value[j] = squeeze_ ? (hz[j] - kSqueezeLow) / kSqueezeRange : hz[j];
  }
  if (mode_ == FilterMode::cfo) fill_morlets();
}

void Filterbank::fill_morlets() {
  for (std::size_t j = 0; j < kBands; ++j) {
    const auto psi = morlet_coefficients({frequency(j), sample_rate_});
    for (std::size_t n = 0; n < kMorletSupport; ++n) {
      kernels_.value[j * kMorletSupport + n] = psi[n].real();
      kernels_.value[(j + kBands) * kMorletSupport + n] = psi[n].imag();
    }
  }
}

std::vector<Parameter*> Filterbank::parameters() {
  switch (mode_) {
    case FilterMode::fixed: return {};
    case FilterMode::free:
    case FilterMode::random: return {&kernels_, &bias_};
    case FilterMode::cfo: return {&centre_};
  }
  return {};
}

std::size_t Filterbank::parameter_count() const {
  switch (mode_) {
    case FilterMode::fixed: return 0;
    case FilterMode::free:
    case FilterMode::random: return kernels_.size() + bias_.size();
    case FilterMode::cfo: return centre_.size();
  }
  return 0;
}

void Filterbank::regenerate() {
  if (mode_ != FilterMode::cfo) return;
  const double lo = 1.0;
  const double hi = sample_rate_ / 2.0 - 1.0;
  for (std::size_t j = 0; j < kBands; ++j) {
    const double f = frequency(j);
    if (!(f > 0.0 && f < sample_rate_ / 2.0)) {
      const double clamped = std::isfinite(f) ? std::clamp(f, lo, hi) : lo;
      centre_.value[j] = squeeze_ ? (clamped - kSqueezeLow) / kSqueezeRange : clamped;
      ++clamp_events_;
    }
  }
  fill_morlets();
}

void Filterbank::backprop_to_centre() {
  if (mode_ != FilterMode::cfo) return;
  const double chain = squeeze_ ? kSqueezeRange : 1.0;
  for (std::size_t j = 0; j < kBands; ++j) {
    const auto dpsi = morlet_frequency_derivative({frequency(j), sample_rate_});
    double g = 0.0;
    for (std::size_t n = 0; n < kMorletSupport; ++n) {
      g += kernels_.grad[j * kMorletSupport + n] * dpsi[n].real();
      g += kernels_.grad[(j + kBands) * kMorletSupport + n] * dpsi[n].imag();
    }
    centre_.grad[j] += chain * g;
  }
}

Filterbank build_filterbank(FilterMode mode, double sample_rate, std::uint64_t seed) {
  return Filterbank(mode, sample_rate, seed);
}

}  // namespace wdec
