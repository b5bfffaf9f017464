#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

#include "wdec/cwt.hpp"
#include "wdec/frontend.hpp"

using namespace wdec;

namespace {

SignalWindow sinusoid(double hz, double amplitude = 1.0) {
  SignalWindow w;
  for (std::size_t c = 0; c < kChannels; ++c) {
    auto ch = w.channel(c);
    for (std::size_t k = 0; k < kWindowSamples; ++k)
      ch[k] = static_cast<float>(amplitude * std::cos(2.0 * std::numbers::pi * hz * static_cast<double>(k) / kSampleRate));
  }
  return w;
}

double max_abs(const ComplexResponse& r) {
  double m = 0.0;
  for (const auto& v : r.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("zero window gives zero response") {
  auto bank = build_filterbank(FilterMode::fixed, 586.0, 0);
  SignalWindow w;
  CHECK(max_abs(cwt_convolve(bank, w)) == 0.0);
  CHECK(max_abs(cwt_direct_oracle(bank, w)) == 0.0);
}

TEST_CASE("fast transform matches direct oracle") {
  for (auto mode : {FilterMode::fixed, FilterMode::random}) {
    auto bank = build_filterbank(mode, 586.0, 5);
    for (std::uint64_t s = 0; s < 3; ++s) {
      auto w = testutil::random_window(100 + s);
      auto fast = cwt_convolve(bank, w);
      auto slow = cwt_direct_oracle(bank, w);
      double diff = 0.0;
      for (std::size_t i = 0; i < fast.values.size(); ++i) diff = std::max(diff, std::abs(fast.values[i] - slow.values[i]));
      CHECK(diff <= 1e-5 * max_abs(slow));
    }
  }
}

TEST_CASE("bias is added to every output sample") {
  auto bank = build_filterbank(FilterMode::free, 586.0, 0);
  bank.bias().value[4] = 0.5;
  bank.bias().value[19] = -0.25;
  SignalWindow w;
  auto fast = cwt_convolve(bank, w);
  auto slow = cwt_direct_oracle(bank, w);
  CHECK(fast.at(3, 4, 100).real() == doctest::Approx(0.5));
  CHECK(fast.at(3, 4, 100).imag() == doctest::Approx(-0.25));
  CHECK(slow.at(7, 4, 589).real() == doctest::Approx(0.5));
}

TEST_CASE("impulse response is the reversed kernel around the impulse") {
  // out[k] = sum_n kernel[n] x[k + n - 59]  =>  out[300 + m] = kernel[59 - m]
  auto bank = build_filterbank(FilterMode::fixed, 586.0, 0);
  SignalWindow w;
  w.channel(2)[300] = 1.0F;
  auto fast = cwt_convolve(bank, w);
  auto slow = cwt_direct_oracle(bank, w);
  for (std::size_t j : {0U, 7U, 14U}) {
    double energy_out = 0.0, energy_kernel = 0.0;
    for (std::size_t k = 0; k < kWindowSamples; ++k) {
      const int m = static_cast<int>(k) - 300;
      const int n = 59 - m;
      std::complex<double> expect{};
      if (n >= 0 && n < 118) expect = {bank.kernel(j, n), bank.kernel(j + kBands, n)};
      CHECK(std::abs(slow.at(2, j, k) - expect) <= 1e-15);
      CHECK(std::abs(fast.at(2, j, k) - expect) <= 1e-9);
      energy_out += std::norm(fast.at(2, j, k));
    }
    for (std::size_t n = 0; n < 118; ++n)
      energy_kernel += bank.kernel(j, n) * bank.kernel(j, n) + bank.kernel(j + kBands, n) * bank.kernel(j + kBands, n);
    CHECK(std::abs(energy_out - energy_kernel) <= 1e-10);
    // untouched channels stay zero
    CHECK(std::abs(fast.at(3, j, 300)) <= 1e-12);
  }
}

TEST_CASE("cosine lands in its own band") {
  auto bank = build_filterbank(FilterMode::fixed, 586.0, 0);
  auto r = cwt_convolve(bank, sinusoid(50.0));
  for (std::size_t k = 200; k < 400; k += 20) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < kBands; ++j)
      if (std::abs(r.at(0, j, k)) > std::abs(r.at(0, best, k))) best = j;
    CHECK(best == 4);
  }
}

TEST_CASE("feature pipeline shape and stationarity") {
  FeatureExtractor fx(build_filterbank(FilterMode::fixed, 586.0, 0), 0.0);
  CHECK(fx.norm().gamma.size() + fx.norm().beta.size() == 30);

  auto w = sinusoid(100.0, 2.0);
  std::vector<double> pooled(kPooledSize);
  fx.pooled(w, pooled);
  for (double v : pooled) CHECK(v >= 0.0);

  const std::size_t band = 9;  // 100 Hz
  for (std::size_t c : {0U, 31U, 63U}) {
    const double* bins = pooled.data() + (c * kBands + band) * kPoolBins;
    const double ref = bins[5];
    for (std::size_t t = 1; t + 1 < kPoolBins; ++t) CHECK(std::abs(bins[t] - ref) <= 0.02 * ref);
  }

  auto features = extract_features(fx, w);
  CHECK(features.values.size() == 64 * 15 * 10);
}

TEST_CASE("pooled equals averaged modulus of the response") {
  auto bank = build_filterbank(FilterMode::random, 586.0, 3);
  FeatureExtractor fx(bank, 0.0);
  auto w = testutil::random_window(9);
  std::vector<double> pooled(kPooledSize);
  fx.pooled(w, pooled);
  auto r = cwt_direct_oracle(bank, w);
  for (std::size_t c : {0U, 40U})
    for (std::size_t j : {0U, 14U})
      for (std::size_t t = 0; t < kPoolBins; ++t) {
        double s = 0.0;
        for (std::size_t k = t * 59; k < (t + 1) * 59; ++k) s += std::abs(r.at(c, j, k));
        CHECK(pooled[(c * kBands + j) * kPoolBins + t] == doctest::Approx(s / 59.0).epsilon(1e-9));
      }
}

TEST_CASE("dropout mask is deterministic inverted dropout") {
  DropoutMask m{0.5, 77};
  std::size_t kept = 0;
  for (std::size_t e = 0; e < 10000; ++e) {
    const double s = m.scale(e);
    CHECK((s == 0.0 || s == 2.0));
    kept += s > 0 ? 1 : 0;
    CHECK(m.scale(e) == s);
  }
  CHECK(kept > 4700);
  CHECK(kept < 5300);
}
