#include "wdec/filter_export.hpp"

#include <sstream>

#include "wdec/spectrum.hpp"

namespace wdec {

namespace {

std::vector<double> kernel_peaks(const Filterbank& bank) {
  std::vector<double> peaks;
  for (std::size_t k = 0; k < kKernels; ++k) {
    const std::span<const double> taps(bank.kernels().value.data() + k * kMorletSupport, kMorletSupport);
    peaks.push_back(power_spectrum(taps, bank.sample_rate()).peak_hz);
  }
  return peaks;
}

}  // namespace

std::string filters_csv(const Filterbank& bank) {
  std::ostringstream os;
  os.precision(17);
  os << "filter_index,part,tap_index,value\n";
  for (std::size_t k = 0; k < kKernels; ++k) {
    const char* part = k < kBands ? "re" : "im";
    for (std::size_t n = 0; n < kMorletSupport; ++n)
      os << k % kBands << ',' << part << ',' << n << ',' << bank.kernel(k, n) << '\n';
  }
  return os.str();
}

nlohmann::json filters_summary(const Filterbank& after, const Filterbank* before) {
  nlohmann::json j{{"mode", to_string(after.mode())},
                   {"sample_rate", after.sample_rate()},
                   {"squeeze", after.squeeze()},
                   {"frequencies", after.frequencies()},
                   {"peak_frequencies_after", kernel_peaks(after)}};
  if (before != nullptr) {
    j["frequencies_before"] = before->frequencies();
    j["peak_frequencies_before"] = kernel_peaks(*before);
  }
  return j;
}

}  // namespace wdec
