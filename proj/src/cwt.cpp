#include "wdec/cwt.hpp"

#include <array>
#include <cmath>

#include "wdec/fft.hpp"
#include "wdec/random.hpp"

namespace wdec {

namespace {
constexpr std::size_t N = CwtEngine::kFftSize;
constexpr std::size_t kCenter = kMorletCenterTap;
using cd = std::complex<double>;
}  // namespace

double DropoutMask::scale(std::size_t element) const {
  if (rate <= 0.0) return 1.0;
  const double u = static_cast<double>(splitmix64(seed ^ (element * 0xd1342543de82ef95ULL)) >> 11) * 0x1.0p-53;
  return u < rate ? 0.0 : 1.0 / (1.0 - rate);
}

struct CwtEngine::Impl {
  RealFft real{N};
  ComplexFft complex{N};
  std::vector<cd> kernel_spectra = std::vector<cd>(kBands * N);
  std::array<double, kKernels> bias{};
  std::vector<cd> channel_spectrum = std::vector<cd>(N);
  std::vector<double> re = std::vector<double>(kWindowSamples);
  std::vector<double> im = std::vector<double>(kWindowSamples);
  std::vector<double> mod = std::vector<double>(kWindowSamples);
  std::vector<cd> grad_acc = std::vector<cd>(kBands * N);

  void load_channel(std::span<const float> x) {
    auto r = real.real();
    for (std::size_t k = 0; k < kWindowSamples; ++k) r[k] = x[k];
    std::fill(r.begin() + kWindowSamples, r.end(), 0.0);
    real.forward();
    auto s = real.spectrum();
    for (std::size_t m = 0; m <= N / 2; ++m) channel_spectrum[m] = s[m];
    for (std::size_t m = N / 2 + 1; m < N; ++m) channel_spectrum[m] = std::conj(s[N - m]);
  }

  // Fills re/im/mod for band j of the loaded channel.
  void band_response(std::size_t j) {
    auto buf = complex.data();
    const cd* h = kernel_spectra.data() + j * N;
    for (std::size_t m = 0; m < N; ++m) buf[m] = channel_spectrum[m] * h[m];
    complex.inverse();
    const double inv_n = 1.0 / static_cast<double>(N);
    for (std::size_t k = 0; k < kWindowSamples; ++k) {
      re[k] = buf[k].real() * inv_n + bias[j];
      im[k] = buf[k].imag() * inv_n + bias[j + kBands];
      mod[k] = std::sqrt(re[k] * re[k] + im[k] * im[k]);
    }
  }
};

CwtEngine::CwtEngine() : impl_(std::make_unique<Impl>()) {}
CwtEngine::~CwtEngine() = default;
CwtEngine::CwtEngine(CwtEngine&&) noexcept = default;
CwtEngine& CwtEngine::operator=(CwtEngine&&) noexcept = default;

void CwtEngine::load(const Filterbank& bank) {
  auto& d = *impl_;
  for (std::size_t j = 0; j < kBands; ++j) {
    auto buf = d.complex.data();
    std::fill(buf.begin(), buf.end(), cd{});
    // h[(centre - n) mod N] = kernel[n]; turns the correlation into a circular convolution.
    for (std::size_t n = 0; n < kMorletSupport; ++n) {
      const std::size_t idx = (kCenter + N - n) % N;
      buf[idx] = {bank.kernel(j, n), bank.kernel(j + kBands, n)};
    }
    d.complex.forward();
    std::copy(buf.begin(), buf.end(), d.kernel_spectra.begin() + static_cast<std::ptrdiff_t>(j * N));
  }
  for (std::size_t k = 0; k < kKernels; ++k) d.bias[k] = bank.bias().value[k];
}

ComplexResponse CwtEngine::respond(const SignalWindow& window) {
  auto& d = *impl_;
  ComplexResponse out;
  for (std::size_t c = 0; c < kChannels; ++c) {
    d.load_channel(window.channel(c));
    for (std::size_t j = 0; j < kBands; ++j) {
      d.band_response(j);
      for (std::size_t k = 0; k < kWindowSamples; ++k) out.at(c, j, k) = {d.re[k], d.im[k]};
    }
  }
  return out;
}

void CwtEngine::pooled(const SignalWindow& window, std::span<double> out, const DropoutMask* mask) {
  auto& d = *impl_;
  const bool drop = mask != nullptr && mask->active();
  for (std::size_t c = 0; c < kChannels; ++c) {
    d.load_channel(window.channel(c));
    for (std::size_t j = 0; j < kBands; ++j) {
      d.band_response(j);
      const std::size_t base = (c * kBands + j) * kWindowSamples;
      for (std::size_t b = 0; b < kPoolBins; ++b) {
        double s = 0.0;
        for (std::size_t k = b * kPoolWidth; k < (b + 1) * kPoolWidth; ++k)
          s += drop ? d.mod[k] * mask->scale(base + k) : d.mod[k];
        out[(c * kBands + j) * kPoolBins + b] = s / static_cast<double>(kPoolWidth);
      }
    }
  }
}

void CwtEngine::backward(const SignalWindow& window, std::span<const double> d_pooled, const DropoutMask* mask,
                         Filterbank& bank) {
  auto& d = *impl_;
  const bool drop = mask != nullptr && mask->active();
  std::fill(d.grad_acc.begin(), d.grad_acc.end(), cd{});
  auto& bias_grad = bank.bias().grad;

  for (std::size_t c = 0; c < kChannels; ++c) {
    d.load_channel(window.channel(c));
    for (std::size_t j = 0; j < kBands; ++j) {
      d.band_response(j);
      const std::size_t base = (c * kBands + j) * kWindowSamples;
      auto q = d.complex.data();
      double g_re_sum = 0.0;
      double g_im_sum = 0.0;
      for (std::size_t k = 0; k < kWindowSamples; ++k) {
        double dm = d_pooled[(c * kBands + j) * kPoolBins + k / kPoolWidth] / static_cast<double>(kPoolWidth);
        if (drop) dm *= mask->scale(base + k);
        double gr = 0.0;
        double gi = 0.0;
        if (d.mod[k] > 0.0) {
          gr = dm * d.re[k] / d.mod[k];
          gi = dm * d.im[k] / d.mod[k];
        }
        g_re_sum += gr;
        g_im_sum += gi;
        q[k] = {gr, gi};
      }
      std::fill(q.begin() + kWindowSamples, q.end(), cd{});
      bias_grad[j] += g_re_sum;
      bias_grad[j + kBands] += g_im_sum;
      // Unnormalized backward transform of q is the spectrum of q reversed.
      d.complex.inverse();
      cd* acc = d.grad_acc.data() + j * N;
      for (std::size_t m = 0; m < N; ++m) acc[m] += d.channel_spectrum[m] * q[m];
    }
  }

  auto& kgrad = bank.kernels().grad;
  const double inv_n = 1.0 / static_cast<double>(N);
  for (std::size_t j = 0; j < kBands; ++j) {
    auto buf = d.complex.data();
    std::copy(d.grad_acc.begin() + static_cast<std::ptrdiff_t>(j * N),
              d.grad_acc.begin() + static_cast<std::ptrdiff_t>((j + 1) * N), buf.begin());
    d.complex.inverse();
    // dL/dkernel[n] = sum_k g[k] x[k + n - centre], read at lag n - centre.
    for (std::size_t n = 0; n < kMorletSupport; ++n) {
      const std::size_t idx = (n + N - kCenter) % N;
      kgrad[j * kMorletSupport + n] += buf[idx].real() * inv_n;
      kgrad[(j + kBands) * kMorletSupport + n] += buf[idx].imag() * inv_n;
    }
  }
}

ComplexResponse cwt_convolve(const Filterbank& bank, const SignalWindow& window) {
  CwtEngine engine;
  engine.load(bank);
  return engine.respond(window);
}

ComplexResponse cwt_direct_oracle(const Filterbank& bank, const SignalWindow& window) {
  ComplexResponse out;
  const long pad_left = static_cast<long>(kMorletCenterTap);
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto x = window.channel(c);
    for (std::size_t j = 0; j < kBands; ++j) {
      for (std::size_t k = 0; k < kWindowSamples; ++k) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t n = 0; n < kMorletSupport; ++n) {
          const long src = static_cast<long>(k) + static_cast<long>(n) - pad_left;
          if (src < 0 || src >= static_cast<long>(kWindowSamples)) continue;
          acc_re += bank.kernel(j, n) * x[static_cast<std::size_t>(src)];
          acc_im += bank.kernel(j + kBands, n) * x[static_cast<std::size_t>(src)];
        }
        out.at(c, j, k) = {acc_re + bank.bias().value[j], acc_im + bank.bias().value[j + kBands]};
      }
    }
  }
  return out;
}

}  // namespace wdec
