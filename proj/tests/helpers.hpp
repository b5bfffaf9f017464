#pragma once

#include <filesystem>
#include <random>
#include <memory>
#include <string>
#include <vector>

#include "wdec/data.hpp"
#include "wdec/synth.hpp"

namespace testutil {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wdec_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline wdec::SignalWindow random_window(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  wdec::SignalWindow w;
  for (auto& v : w.samples) v = n(rng);
  return w;
}

inline wdec::SynthConfig tiny_config(std::size_t sessions = 3, double seconds = 3.0, std::uint64_t seed = 7) {
  wdec::SynthConfig c;
  c.n_sessions = sessions;
  c.session_duration_s = seconds;
  c.seed = seed;
  return c;
}

// Two sessions with identical signals and opposite targets: fitting the first
// can only make the second worse.
inline wdec::Dataset mirrored_dataset(const wdec::SynthConfig& cfg) {
  auto base = wdec::generate_synthetic(cfg);
  auto twin = std::make_shared<wdec::Session>(*base.sessions.at(0));
  twin->id = 1;
  for (auto& v : twin->targets) v = -v;
  return wdec::make_dataset({base.sessions[0], twin});
}

// Window indices of session `s`.
inline std::vector<std::size_t> session_windows(const wdec::Dataset& d, std::size_t s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.windows[i].session == s) out.push_back(i);
  return out;
}

}  // namespace testutil
