#include "wdec/model.hpp"

#include "wdec/error.hpp"

namespace wdec {

std::string to_string(FrontendMode mode) {
  switch (mode) {
    case FrontendMode::hand_crafted: return "hand-crafted";
    case FrontendMode::e2e_free: return "e2e-free";
    case FrontendMode::e2e_cfo: return "e2e-cfo";
    case FrontendMode::e2e_random: return "e2e-random";
  }
  return "?";
}

FrontendMode frontend_mode_from_string(const std::string& name) {
  if (name == "hand-crafted") return FrontendMode::hand_crafted;
  if (name == "e2e-free") return FrontendMode::e2e_free;
  if (name == "e2e-cfo") return FrontendMode::e2e_cfo;
  if (name == "e2e-random") return FrontendMode::e2e_random;
  throw ConfigError("frontend", "unknown frontend mode '" + name +
                                    "' (expected hand-crafted, e2e-free, e2e-cfo or e2e-random)");
}

FilterMode filter_mode_of(FrontendMode mode) {
  switch (mode) {
    case FrontendMode::hand_crafted: return FilterMode::fixed;
    case FrontendMode::e2e_free: return FilterMode::free;
    case FrontendMode::e2e_cfo: return FilterMode::cfo;
    case FrontendMode::e2e_random: return FilterMode::random;
  }
  return FilterMode::fixed;
}

EndToEndModel::EndToEndModel(ModelConfig config)
    : config_(std::move(config)),
      extractor_(Filterbank(filter_mode_of(config_.frontend), kSampleRate, derive_seed(config_.seed, {0x66626bULL}),
                            config_.initial_frequencies, config_.cfo_squeeze),
                 config_.extractor_dropout),
      head_(make_head(config_.head, HeadConfig{config_.head_dropout, derive_seed(config_.seed, {0x686564ULL})})) {}

std::vector<Parameter*> EndToEndModel::parameters() {
  auto p = extractor_.parameters();
  for (auto* q : head_->parameters()) p.push_back(q);
  return p;
}

void EndToEndModel::zero_grad() {
  extractor_.bank().kernels().zero_grad();
  extractor_.bank().bias().zero_grad();
  extractor_.bank().centre().zero_grad();
  for (auto* p : parameters()) p->zero_grad();
}

std::vector<NamedState> EndToEndModel::state() {
  auto& bank = extractor_.bank();
  auto& norm = extractor_.norm();
  std::vector<NamedState> s{{bank.kernels().name, &bank.kernels().value},
                            {bank.bias().name, &bank.bias().value},
                            {bank.centre().name, &bank.centre().value},
                            {norm.gamma.name, &norm.gamma.value},
                            {norm.beta.name, &norm.beta.value},
                            {"frontend.norm.running_mean", &norm.running_mean},
                            {"frontend.norm.running_var", &norm.running_var}};
  for (auto* p : head_->parameters()) s.push_back({p->name, &p->value});
  const auto bufs = head_->buffers();
  const std::string prefix = head_->kind() == HeadKind::mlp ? "mlp.bn" : "cnn.bn";
  s.push_back({prefix + ".running_mean", bufs.at(0)});
  s.push_back({prefix + ".running_var", bufs.at(1)});
  return s;
}

std::vector<LayerCount> EndToEndModel::count_parameters() const {
  std::vector<LayerCount> out{{"frontend.conv_time", extractor_.bank().parameter_count()},
                              {"frontend.norm", 2 * extractor_.norm().channels()}};
  for (const auto& l : head_->layer_counts()) out.push_back({to_string(head_->kind()) + "." + l.layer, l.parameters});
  return out;
}

Matrix EndToEndModel::predict_from_pooled(const Matrix& pooled) {
  const Matrix normalized = extractor_.normalize(pooled, false);
  return head_->forward(normalized, false, nullptr);
}

Vec3 window_prediction(std::span<const double> steps) {
  if (steps.size() < 3 || steps.size() % 3 != 0) throw ShapeError("predictions", "expected steps x 3 values");
  const std::size_t last = steps.size() - 3;
  return {steps[last], steps[last + 1], steps[last + 2]};
}

Vec3 window_prediction_mean(std::span<const double> steps) {
  if (steps.size() < 3 || steps.size() % 3 != 0) throw ShapeError("predictions", "expected steps x 3 values");
  Vec3 m{0.0, 0.0, 0.0};
  const double n = static_cast<double>(steps.size() / 3);
  for (std::size_t s = 0; s < steps.size(); s += 3)
    for (int a = 0; a < 3; ++a) m[a] += steps[s + a] / n;
  return m;
}

}  // namespace wdec
