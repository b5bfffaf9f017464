#include "wdec/synth.hpp"

#include <cmath>
#include <numbers>

#include "wdec/error.hpp"
#include "wdec/fft.hpp"
#include "wdec/random.hpp"

namespace wdec {

void SynthConfig::validate() const {
  if (n_sessions == 0) throw ConfigError("n_sessions", "must be positive");
  if (!(session_duration_s > 0.0)) throw ConfigError("session_duration_s", "must be positive");
  if (bands.empty()) throw ConfigError("bands", "at least one informative band is required");
  const double nyquist = kSampleRate / 2.0;
  for (const auto& b : bands) {
    if (!(b.center_hz > 0.0 && b.center_hz < nyquist))
      throw ConfigError("bands", "band center " + std::to_string(b.center_hz) + " Hz violates Nyquist limit (0, " +
                                     std::to_string(nyquist) + ") Hz");
    if (!(b.bandwidth_hz > 0.0)) throw ConfigError("bands", "bandwidth must be positive");
  }
  if (!channel_weights.empty() && channel_weights.size() != kChannels * bands.size() * 3)
    throw ConfigError("channel_weights", "expected " + std::to_string(kChannels * bands.size() * 3) + " values, got " +
                                             std::to_string(channel_weights.size()));
  if (!(snr >= 0.0)) throw ConfigError("snr", "must be non-negative");
  if (!(noise_rms >= 0.0)) throw ConfigError("noise_rms", "must be non-negative");
  if (!(weight_scale >= 0.0)) throw ConfigError("weight_scale", "must be non-negative");
  if (!(walk_step >= 0.0)) throw ConfigError("walk_step", "must be non-negative");
}

std::size_t SynthConfig::samples_per_session() const {
  return static_cast<std::size_t>(std::llround(session_duration_s * kSampleRate));
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : bands) bj.push_back({{"center_hz", b.center_hz}, {"bandwidth_hz", b.bandwidth_hz}});
  return {{"n_sessions", n_sessions}, {"session_duration_s", session_duration_s},
          {"bands", bj},           {"channel_weights", channel_weights},
          {"weight_scale", weight_scale}, {"noise_exponent", noise_exponent},
          {"noise_rms", noise_rms}, {"snr", snr},
          {"walk_step", walk_step}, {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_sessions = j.at("n_sessions").get<std::size_t>();
  c.session_duration_s = j.at("session_duration_s").get<double>();
  c.bands.clear();
  for (const auto& b : j.at("bands")) c.bands.push_back({b.at("center_hz").get<double>(), b.at("bandwidth_hz").get<double>()});
  c.channel_weights = j.at("channel_weights").get<std::vector<double>>();
  c.weight_scale = j.at("weight_scale").get<double>();
  c.noise_exponent = j.at("noise_exponent").get<double>();
  c.noise_rms = j.at("noise_rms").get<double>();
  c.snr = j.at("snr").get<double>();
  c.walk_step = j.at("walk_step").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<double> resolve_channel_weights(const SynthConfig& config) {
  if (!config.channel_weights.empty()) return config.channel_weights;
  Rng rng(derive_seed(config.seed, {0x77656967ULL}));
  std::normal_distribution<double> normal(0.0, config.weight_scale);
  std::vector<double> w(kChannels * config.bands.size() * 3);
  for (auto& v : w) v = normal(rng);
  return w;
}

namespace {

Vec3 normalized(Vec3 v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Shapes a spectrum with random phases, inverts and rescales to `rms`.
void shape_to_rms(RealFft& fft, double rms) {
  fft.inverse();
  auto x = fft.real();
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double cur = std::sqrt(ss / static_cast<double>(x.size()));
  const double scale = cur > 0.0 ? rms / cur : 0.0;
  for (double& v : x) v *= scale;
}

}  // namespace

Session generate_session(const SynthConfig& config, std::span<const double> weights, int session_id) {
  const std::size_t n = config.samples_per_session();
  const std::size_t n_bands = config.bands.size();
  const std::uint64_t session_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(session_id)});

  Session s;
  s.id = session_id;
  s.n_samples = n;
  s.seed = session_seed;

  // Smooth random walk on the unit sphere, one step per 0.1 s.
  const std::size_t n_steps = target_steps_for(n);
  s.targets.resize(n_steps * 3);
  {
    Rng rng(derive_seed(session_seed, {0x74677473ULL}));
    std::normal_distribution<double> normal;
    Vec3 y = normalized({normal(rng), normal(rng), normal(rng)});
    for (std::size_t k = 0; k < n_steps; ++k) {
      if (k > 0) {
        Vec3 g{normal(rng), normal(rng), normal(rng)};
        y = normalized({y[0] + config.walk_step * g[0], y[1] + config.walk_step * g[1], y[2] + config.walk_step * g[2]});
      }
      for (int a = 0; a < 3; ++a) s.targets[3 * k + a] = static_cast<float>(y[a]);
    }
  }

  s.raw.assign(kChannels * n, 0.0F);
  RealFft fft(n);
  const double df = kSampleRate / static_cast<double>(n);
  std::vector<double> acc(n);

  for (std::size_t c = 0; c < kChannels; ++c) {
    Rng rng(derive_seed(session_seed, {0x6368ULL, c}));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> normal;

    auto spec = fft.spectrum();
    spec[0] = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
      const double amp = std::pow(static_cast<double>(k) * df, -config.noise_exponent);
      spec[k] = std::polar(amp, phase(rng));
    }
    shape_to_rms(fft, config.noise_rms);
    std::copy(fft.real().begin(), fft.real().end(), acc.begin());

    for (std::size_t b = 0; b < n_bands; ++b) {
      const Band& band = config.bands[b];
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = static_cast<double>(k) * df;
        spec[k] = std::abs(f - band.center_hz) <= band.bandwidth_hz / 2.0 ? std::complex<double>(normal(rng), normal(rng))
                                                                           : std::complex<double>(0.0, 0.0);
      }
      shape_to_rms(fft, 1.0);
      const auto carrier = fft.real();
      const double* w = weights.data() + (c * n_bands + b) * 3;
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t step = target_step_of_sample(t);
        const double proj = w[0] * s.targets[3 * step] + w[1] * s.targets[3 * step + 1] + w[2] * s.targets[3 * step + 2];
        const double envelope = std::max(0.0, 1.0 + config.snr * proj);
        acc[t] += envelope * carrier[t];
      }
    }
    float* dst = s.raw.data() + c * n;
    for (std::size_t t = 0; t < n; ++t) dst[t] = static_cast<float>(acc[t]);
  }
  return s;
}

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  const auto weights = resolve_channel_weights(config);
  std::vector<std::shared_ptr<const Session>> sessions;
  sessions.reserve(config.n_sessions);
  for (std::size_t i = 0; i < config.n_sessions; ++i)
    sessions.push_back(std::make_shared<const Session>(generate_session(config, weights, static_cast<int>(i))));
  return make_dataset(std::move(sessions), config.to_json(), config.seed);
}

}  // namespace wdec
