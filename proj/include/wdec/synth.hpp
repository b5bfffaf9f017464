#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "wdec/data.hpp"

namespace wdec {

struct Band {
  double center_hz = 70.0;
  double bandwidth_hz = 20.0;
};

// Surrogate recording model: every channel carries narrowband carriers whose
// envelopes are linear in the current target direction, over 1/f noise.
struct SynthConfig {
  std::size_t n_sessions = 24;
  double session_duration_s = 120.0;
  std::vector<Band> bands{Band{}};
  std::vector<double> channel_weights;  // [64 x n_bands x 3]; empty -> drawn from seed
  double weight_scale = 0.25;           // std of each drawn weight
  double noise_exponent = 1.0;          // noise amplitude ~ 1/f^exponent
  double noise_rms = 1.0;
  double snr = 2.0;
  double walk_step = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t samples_per_session() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

// Weights actually used for generation (drawn when not given).
std::vector<double> resolve_channel_weights(const SynthConfig& config);

Session generate_session(const SynthConfig& config, std::span<const double> weights, int session_id);

Dataset generate_synthetic(const SynthConfig& config);

}  // namespace wdec
