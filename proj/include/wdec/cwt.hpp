#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "wdec/data.hpp"
#include "wdec/filterbank.hpp"

namespace wdec {

inline constexpr std::size_t kPoolBins = kSteps;
inline constexpr std::size_t kPoolWidth = kWindowStride;
inline constexpr std::size_t kPooledSize = kChannels * kBands * kPoolBins;  // 9600

// Complex filter response [64 channels x 15 bands x 590 samples].
struct ComplexResponse {
  std::vector<std::complex<double>> values;

  ComplexResponse() : values(kChannels * kBands * kWindowSamples) {}
  std::complex<double>& at(std::size_t c, std::size_t j, std::size_t k) {
    return values[(c * kBands + j) * kWindowSamples + k];
  }
  const std::complex<double>& at(std::size_t c, std::size_t j, std::size_t k) const {
    return values[(c * kBands + j) * kWindowSamples + k];
  }
};

// Inverted dropout on the modulus, drawn statelessly from (seed, element).
struct DropoutMask {
  double rate = 0.0;
  std::uint64_t seed = 0;

  bool active() const { return rate > 0.0; }
  double scale(std::size_t element) const;
};

// Padding convention shared by both implementations: cross-correlation with the
// kernel's centre tap (59) over input sample k, i.e. 59 zeros before the window
// and 58 after:
//   out[k] = sum_n kernel[n] * x[k + n - 59] + bias
class CwtEngine {
public:
  static constexpr std::size_t kFftSize = 768;

  CwtEngine();
  ~CwtEngine();
  CwtEngine(CwtEngine&&) noexcept;
  CwtEngine& operator=(CwtEngine&&) noexcept;

  // Must be called whenever the filterbank kernels or biases change.
  void load(const Filterbank& bank);

  ComplexResponse respond(const SignalWindow& window);

  // Modulus -> optional dropout -> average pool (59-sample bins); writes 9600
  // values laid out (channel, band, bin).
  void pooled(const SignalWindow& window, std::span<double> out, const DropoutMask* mask = nullptr);

  // Adds dL/dkernels and dL/dbias for one window given dL/dpooled.
  void backward(const SignalWindow& window, std::span<const double> d_pooled, const DropoutMask* mask,
                Filterbank& bank);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ComplexResponse cwt_convolve(const Filterbank& bank, const SignalWindow& window);

// Independent direct-form reference for cwt_convolve.
ComplexResponse cwt_direct_oracle(const Filterbank& bank, const SignalWindow& window);

}  // namespace wdec
