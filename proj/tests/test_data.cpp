#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

#include "wdec/data.hpp"
#include "wdec/error.hpp"
#include "wdec/hash.hpp"
#include "wdec/ridge.hpp"
#include "wdec/synth.hpp"

using namespace wdec;

namespace {

std::shared_ptr<const Session> blank_session(std::size_t samples, int id = 0) {
  auto s = std::make_shared<Session>();
  s->id = id;
  s->n_samples = samples;
  s->raw.assign(kChannels * samples, 0.0F);
  s->targets.assign(target_steps_for(samples) * 3, 0.0F);
  for (std::size_t k = 0; k < s->n_steps(); ++k) {
    s->targets[3 * k] = static_cast<float>(k);
    s->targets[3 * k + 1] = 1.0F;
  }
  return s;
}

std::vector<Vec3> sorted_labels(const Dataset& d) {
  std::vector<Vec3> out;
  for (const auto& w : d.windows) out.push_back(w.target.label());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("windowing enumerates offsets with stride 59") {
  SUBCASE("exact length") {
    std::vector sessions{blank_session(590)};
    auto r = window_sessions(sessions);
    CHECK(r.windows.size() == 1);
    CHECK(r.skipped_sessions == 0);
  }
  SUBCASE("649 samples") {
    std::vector sessions{blank_session(649)};
    auto r = window_sessions(sessions);
    REQUIRE(r.windows.size() == 2);
    CHECK(r.windows[0].start == 0);
    CHECK(r.windows[1].start == 59);
  }
  SUBCASE("too short") {
    std::vector sessions{blank_session(589)};
    auto r = window_sessions(sessions);
    CHECK(r.windows.empty());
    CHECK(r.skipped_sessions == 1);
  }
  SUBCASE("count formula") {
    for (std::size_t t : {590U, 648U, 649U, 1000U, 5860U, 70320U}) {
      std::vector sessions{blank_session(t)};
      CHECK(window_sessions(sessions).windows.size() == (t - 590) / 59 + 1);
      CHECK(window_count(t) == (t - 590) / 59 + 1);
    }
  }
  SUBCASE("windows stay inside their session") {
    std::vector sessions{blank_session(700, 0), blank_session(900, 1)};
    auto r = window_sessions(sessions);
    for (const auto& w : r.windows) CHECK(w.start + kWindowSamples <= sessions[w.session]->n_samples);
  }
}

TEST_CASE("window targets are the steps ending each 59-sample block") {
  std::vector sessions{blank_session(2000)};
  auto r = window_sessions(sessions);
  for (const auto& w : r.windows) {
    for (std::size_t j = 0; j < kSteps; ++j) {
      const auto step = target_step_of_sample(w.start + (j + 1) * kWindowStride - 1);
      CHECK(w.target.steps[j][0] == doctest::Approx(static_cast<double>(step)));
    }
  }
}

TEST_CASE("grid layout") {
  CHECK(GridLayout::position(0) == GridPosition{0, 0, 0});
  CHECK(GridLayout::position(5) == GridPosition{0, 1, 1});
  CHECK(GridLayout::position(32) == GridPosition{1, 0, 0});
  CHECK(GridLayout::position(63) == GridPosition{1, 7, 3});
  for (std::size_t c = 0; c < kChannels; ++c) CHECK(GridLayout::channel(GridLayout::position(c)) == c);
}

TEST_CASE("synthetic generation is deterministic") {
  auto cfg = testutil::tiny_config(2, 2.0, 11);
  auto a = generate_synthetic(cfg);
  auto b = generate_synthetic(cfg);
  REQUIRE(a.sessions.size() == b.sessions.size());
  for (std::size_t i = 0; i < a.sessions.size(); ++i) {
    CHECK(a.sessions[i]->raw == b.sessions[i]->raw);
    CHECK(a.sessions[i]->targets == b.sessions[i]->targets);
  }
  CHECK(dataset_hash(a) == dataset_hash(b));

  cfg.seed = 12;
  CHECK(dataset_hash(generate_synthetic(cfg)) != dataset_hash(a));
}

TEST_CASE("synthetic targets are unit vectors") {
  auto d = generate_synthetic(testutil::tiny_config(2, 3.0, 3));
  for (const auto& s : d.sessions) {
    for (std::size_t k = 0; k < s->n_steps(); ++k) {
      auto t = s->target(k);
      CHECK(std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.bands = {Band{293.0, 10.0}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.bands = {Band{300.0, 10.0}};
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg.bands = {Band{0.0, 10.0}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.bands = {Band{70.0, 20.0}};
  cfg.channel_weights = std::vector<double>(10, 0.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.channel_weights.clear();
  CHECK_NOTHROW(cfg.validate());

  auto round = SynthConfig::from_json(cfg.to_json());
  CHECK(round.to_json() == cfg.to_json());
}

TEST_CASE("zero snr carries no target information in band power") {
  // Band power at the informative carrier by direct DFT on a channel subset;
  // correlation with every target axis must vanish.
  auto cfg = testutil::tiny_config(1000, 2.0, 21);
  cfg.snr = 0.0;
  auto d = generate_synthetic(cfg);
  REQUIRE(d.size() >= 10000);

  constexpr std::size_t kProbeChannels = 8;
  const double f = cfg.bands[0].center_hz;
  std::vector<double> cs(kWindowSamples), sn(kWindowSamples);
  for (std::size_t n = 0; n < kWindowSamples; ++n) {
    cs[n] = std::cos(2.0 * std::numbers::pi * f * static_cast<double>(n) / kSampleRate);
    sn[n] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(n) / kSampleRate);
  }

  const std::size_t n = d.size();
  std::vector<std::vector<double>> power(kProbeChannels, std::vector<double>(n));
  std::vector<std::array<double, 3>> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ref = d.windows[i];
    const auto& s = *d.sessions[ref.session];
    for (std::size_t c = 0; c < kProbeChannels; ++c) {
      const float* x = s.raw.data() + (c * 8) * s.n_samples + ref.start;
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < kWindowSamples; ++k) {
        re += x[k] * cs[k];
        im += x[k] * sn[k];
      }
      power[c][i] = re * re + im * im;
    }
    labels[i] = ref.target.label();
  }

  auto corr = [n](const std::vector<double>& a, auto axis) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += a[i];
      mb += axis(i);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double da = a[i] - ma, db = axis(i) - mb;
      sab += da * db;
      saa += da * da;
      sbb += db * db;
    }
    return sab / std::sqrt(saa * sbb);
  };

  double worst = 0.0;
  for (std::size_t c = 0; c < kProbeChannels; ++c)
    for (std::size_t ax = 0; ax < 3; ++ax)
      worst = std::max(worst, std::abs(corr(power[c], [&](std::size_t i) { return labels[i][ax]; })));
  CHECK(worst < 0.1);
}

TEST_CASE("band-power ridge decodes an informative band") {
  auto cfg = testutil::tiny_config(8, 20.0, 5);
  cfg.bands = {Band{70.0, 20.0}};
  cfg.snr = 2.0;
  auto d = generate_synthetic(cfg);
  auto train = select_sessions(d, 0, 6);
  auto test = select_sessions(d, 6, 8);
  auto r = ridge_oracle(train, test, cfg.bands, 0);
  CHECK(r.test_cs > 0.5);
}

TEST_CASE("target perturbation") {
  auto d = generate_synthetic(testutil::tiny_config(2, 3.0, 9));
  REQUIRE(d.size() >= 10);

  SUBCASE("fraction 0 is identity") {
    auto p = perturb_targets(d, 0.0, 1);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(p.windows[i].target == d.windows[i].target);
  }
  SUBCASE("fraction 1 preserves the multiset and permutes") {
    auto p = perturb_targets(d, 1.0, 1);
    CHECK(sorted_labels(p) == sorted_labels(d));
    std::size_t moved = 0;
    for (std::size_t i = 0; i < d.size(); ++i) moved += p.windows[i].target == d.windows[i].target ? 0 : 1;
    CHECK(moved > 0);
  }
  SUBCASE("exact count on ten windows") {
    std::vector<std::size_t> idx(10);
    for (std::size_t i = 0; i < 10; ++i) idx[i] = i * 2;
    auto ten = select_windows(d, idx);
    CHECK(perturbed_count(10, 0.4) == 4);
    auto p = perturb_targets(ten, 0.4, 3);
    CHECK(sorted_labels(p) == sorted_labels(ten));
    std::size_t moved = 0;
    for (std::size_t i = 0; i < 10; ++i) moved += p.windows[i].target == ten.windows[i].target ? 0 : 1;
    CHECK(moved <= 4);
    CHECK(moved >= 2);
  }
  SUBCASE("signal untouched, reproducible") {
    auto a = perturb_targets(d, 0.6, 42);
    auto b = perturb_targets(d, 0.6, 42);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(a.windows[i].target == b.windows[i].target);
      CHECK(a.windows[i].start == d.windows[i].start);
      CHECK(a.windows[i].session == d.windows[i].session);
    }
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(perturb_targets(d, 1.5, 0), ConfigError);
    CHECK_THROWS_AS(perturb_targets(d, -0.1, 0), ConfigError);
    std::vector<std::size_t> one{0};
    CHECK_THROWS_AS(perturb_targets(select_windows(d, one), 0.5, 0), ShapeError);
  }
}

TEST_CASE("session selection") {
  auto d = generate_synthetic(testutil::tiny_config(3, 2.0, 1));
  auto s = select_sessions(d, 1, 3);
  CHECK(s.sessions.size() == 2);
  CHECK(s.sessions[0] == d.sessions[1]);
  CHECK_THROWS_AS(select_sessions(d, 2, 5), ShapeError);
}
