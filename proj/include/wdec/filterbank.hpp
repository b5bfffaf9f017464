#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdec/morlet.hpp"
#include "wdec/param.hpp"

namespace wdec {

inline constexpr std::size_t kBands = 15;
inline constexpr std::size_t kKernels = 2 * kBands;

enum class FilterMode { fixed, free, random, cfo };

std::string to_string(FilterMode mode);
FilterMode filter_mode_from_string(const std::string& name);

// 10, 20, ..., 150 Hz
std::vector<double> default_frequencies();

// Squeezed CFO variable: u = (f - low) / range, so d/du = range * d/df.
inline constexpr double kSqueezeLow = 10.0;
inline constexpr double kSqueezeRange = 140.0;

// Bank of 15 complex temporal filters stored as 30 real kernels of 118 taps:
// rows 0-14 hold real parts, rows 15-29 the matching imaginary parts.
class Filterbank {
public:
  Filterbank(FilterMode mode, double sample_rate, std::uint64_t seed,
             std::optional<std::vector<double>> frequencies = std::nullopt, bool squeeze = false);

  FilterMode mode() const { return mode_; }
  double sample_rate() const { return sample_rate_; }
  bool squeeze() const { return squeeze_; }

  double frequency(std::size_t band) const;
  std::vector<double> frequencies() const;

  const Parameter& kernels() const { return kernels_; }
  Parameter& kernels() { return kernels_; }
  const Parameter& bias() const { return bias_; }
  Parameter& bias() { return bias_; }
  // Raw optimization variable of CFO: frequencies in Hz, or u when squeezed.
  const Parameter& centre() const { return centre_; }
  Parameter& centre() { return centre_; }

  double kernel(std::size_t k, std::size_t tap) const { return kernels_.value[k * kMorletSupport + tap]; }

  // Parameters the optimizer may update in this mode (none when fixed).
  std::vector<Parameter*> parameters();
  std::size_t parameter_count() const;

  // CFO: clamp frequencies into [1, f_s/2 - 1] and rebuild kernels from them.
  void regenerate();
  // CFO: fold accumulated kernel gradients into the centre gradient.
  void backprop_to_centre();
  std::size_t clamp_events() const { return clamp_events_; }

  // Replaces the frequencies (Hz) and, in CFO mode, regenerates kernels.
  void set_frequencies(const std::vector<double>& hz);

private:
  void fill_morlets();

  FilterMode mode_;
  double sample_rate_;
  bool squeeze_;
  Parameter kernels_;
  Parameter bias_;
  Parameter centre_;
  std::size_t clamp_events_ = 0;
};

Filterbank build_filterbank(FilterMode mode, double sample_rate, std::uint64_t seed);

}  // namespace wdec
