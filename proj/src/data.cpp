#include "wdec/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdec/error.hpp"
#include "wdec/random.hpp"

namespace wdec {

SignalWindow Dataset::window(std::size_t i) const {
  const WindowRef& ref = windows.at(i);
  const Session& s = *sessions.at(ref.session);
  SignalWindow w;
  w.window_start = ref.start;
  w.session_id = s.id;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const float* src = s.raw.data() + c * s.n_samples + ref.start;
    std::copy(src, src + kWindowSamples, w.samples.begin() + static_cast<std::ptrdiff_t>(c * kWindowSamples));
  }
  return w;
}

std::size_t window_count(std::size_t n_samples) {
  if (n_samples < kWindowSamples) return 0;
  return (n_samples - kWindowSamples) / kWindowStride + 1;
}

WindowingResult window_sessions(std::span<const std::shared_ptr<const Session>> sessions) {
  WindowingResult out;
  for (std::size_t si = 0; si < sessions.size(); ++si) {
    const Session& s = *sessions[si];
    const std::size_t n = window_count(s.n_samples);
    if (n == 0) {
      ++out.skipped_sessions;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      WindowRef ref;
      ref.session = si;
      ref.start = k * kWindowStride;
      for (std::size_t q = 0; q < kSteps; ++q) {
        // last sample of the q-th 59-sample sub-block
        const std::size_t sample = ref.start + kWindowStride * (q + 1) - 1;
        ref.target.steps[q] = s.target(target_step_of_sample(sample));
      }
      out.windows.push_back(ref);
    }
  }
  return out;
}

Dataset make_dataset(std::vector<std::shared_ptr<const Session>> sessions, nlohmann::json config,
                     std::uint64_t seed) {
  Dataset d;
  d.sessions = std::move(sessions);
  auto w = window_sessions(d.sessions);
  d.windows = std::move(w.windows);
  d.skipped_sessions = w.skipped_sessions;
  d.config = std::move(config);
  d.seed = seed;
  return d;
}

Dataset select_sessions(const Dataset& source, std::size_t first, std::size_t last) {
  if (first > last || last > source.sessions.size())
    throw ShapeError("sessions", "range [" + std::to_string(first) + ", " + std::to_string(last) +
                                     ") outside " + std::to_string(source.sessions.size()) + " sessions");
  std::vector<std::shared_ptr<const Session>> picked(source.sessions.begin() + static_cast<std::ptrdiff_t>(first),
                                                     source.sessions.begin() + static_cast<std::ptrdiff_t>(last));
  return make_dataset(std::move(picked), source.config, source.seed);
}

Dataset select_windows(const Dataset& source, std::span<const std::size_t> indices) {
  Dataset d;
  d.sessions = source.sessions;
  d.config = source.config;
  d.seed = source.seed;
  d.windows.reserve(indices.size());
  for (auto i : indices) d.windows.push_back(source.windows.at(i));
  return d;
}

std::size_t perturbed_count(std::size_t n_windows, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_windows) + 1e-9));
}

Dataset perturb_targets(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ConfigError("fraction", "must lie in [0, 1], got " + std::to_string(fraction));
  const std::size_t n = dataset.size();
  if (fraction > 0.0 && n < 2) throw ShapeError("windows", "perturbation needs at least 2 windows");

  Dataset out = dataset;
  const std::size_t k = perturbed_count(n, fraction);
  if (k < 2) return out;

  Rng rng(derive_seed(seed, {0x7065727475ULL}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(subset.begin(), subset.end());

  std::vector<std::size_t> source = subset;
  std::shuffle(source.begin(), source.end(), rng);
  for (std::size_t i = 0; i < k; ++i) out.windows[subset[i]].target = dataset.windows[source[i]].target;
  return out;
}

}  // namespace wdec
