#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"

namespace wdec {

inline constexpr std::size_t kChannels = 64;
inline constexpr std::size_t kWindowSamples = 590;
inline constexpr std::size_t kWindowStride = 59;
inline constexpr std::size_t kSteps = 10;
inline constexpr double kSampleRate = 586.0;

// Target timeline runs at 10 Hz; one step spans 58.6 samples.
inline constexpr std::size_t target_step_of_sample(std::size_t sample) { return sample * 10 / 586; }
inline constexpr std::size_t target_steps_for(std::size_t n_samples) { return (n_samples * 10 + 585) / 586; }

using Vec3 = std::array<double, 3>;

// Physical placement of one electrode: two implants, 8 rows by 4 columns each.
struct GridPosition {
  int implant = 0;
  int row = 0;
  int col = 0;
  friend bool operator==(const GridPosition&, const GridPosition&) = default;
};

class GridLayout {
public:
  static constexpr int kImplants = 2;
  static constexpr int kRows = 8;
  static constexpr int kCols = 4;

  // Channels 0-31 on implant 0, 32-63 on implant 1, row-major within an implant.
  static constexpr GridPosition position(std::size_t channel) {
    const int c = static_cast<int>(channel);
    return {c / 32, (c % 32) / kCols, c % kCols};
  }
  static constexpr std::size_t channel(GridPosition p) {
    return static_cast<std::size_t>(p.implant * 32 + p.row * kCols + p.col);
  }
};

// One second of multichannel signal, 64 x 590, channel-major.
struct SignalWindow {
  std::vector<float> samples;
  std::size_t window_start = 0;
  int session_id = 0;

  SignalWindow() : samples(kChannels * kWindowSamples, 0.0F) {}

  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(samples).subspan(c * kWindowSamples, kWindowSamples);
  }
  std::span<float> channel(std::size_t c) {
    return std::span<float>(samples).subspan(c * kWindowSamples, kWindowSamples);
  }
};

// Ten 0.1 s direction targets; the window label is the last one.
struct TargetTrajectory {
  std::array<Vec3, kSteps> steps{};

  const Vec3& label() const { return steps.back(); }
  friend bool operator==(const TargetTrajectory&, const TargetTrajectory&) = default;
};

struct Session {
  int id = 0;
  std::size_t n_samples = 0;
  std::vector<float> raw;      // [64 x n_samples]
  std::vector<float> targets;  // [target_steps_for(n_samples) x 3]
  std::uint64_t seed = 0;

  std::size_t n_steps() const { return targets.size() / 3; }
  Vec3 target(std::size_t step) const {
    return {targets[3 * step], targets[3 * step + 1], targets[3 * step + 2]};
  }
};

struct WindowRef {
  std::size_t session = 0;  // index into Dataset::sessions
  std::size_t start = 0;
  TargetTrajectory target;
};

struct WindowingResult {
  std::vector<WindowRef> windows;
  std::size_t skipped_sessions = 0;
};

// Immutable after construction; sessions are shared between derived datasets.
struct Dataset {
  std::vector<std::shared_ptr<const Session>> sessions;
  std::vector<WindowRef> windows;
  std::size_t skipped_sessions = 0;
  nlohmann::json config;  // generator echo
  std::uint64_t seed = 0;

  std::size_t size() const { return windows.size(); }
  SignalWindow window(std::size_t i) const;
};

std::size_t window_count(std::size_t n_samples);

WindowingResult window_sessions(std::span<const std::shared_ptr<const Session>> sessions);

// Builds a dataset (with windows) from shared sessions.
Dataset make_dataset(std::vector<std::shared_ptr<const Session>> sessions, nlohmann::json config = {},
                     std::uint64_t seed = 0);

// Sessions [first, last) of `source`, windows re-derived.
Dataset select_sessions(const Dataset& source, std::size_t first, std::size_t last);

// Subset of windows by index, sharing sessions.
Dataset select_windows(const Dataset& source, std::span<const std::size_t> indices);

// Shuffles the targets of floor(fraction * N) randomly chosen windows among
// themselves. The multiset of targets is preserved.
Dataset perturb_targets(const Dataset& dataset, double fraction, std::uint64_t seed);

std::size_t perturbed_count(std::size_t n_windows, double fraction);

}  // namespace wdec
