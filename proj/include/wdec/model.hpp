#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wdec/frontend.hpp"
#include "wdec/heads.hpp"

namespace wdec {

enum class FrontendMode { hand_crafted, e2e_free, e2e_cfo, e2e_random };

std::string to_string(FrontendMode mode);
FrontendMode frontend_mode_from_string(const std::string& name);
FilterMode filter_mode_of(FrontendMode mode);

struct ModelConfig {
  HeadKind head = HeadKind::mlp;
  FrontendMode frontend = FrontendMode::hand_crafted;
  std::uint64_t seed = 0;
  double extractor_dropout = 0.5;
  double head_dropout = 0.5;
  bool cfo_squeeze = false;
  std::optional<std::vector<double>> initial_frequencies;  // Hz, default 10..150
};

struct NamedState {
  std::string name;
  std::vector<double>* values;
};

class EndToEndModel {
public:
  explicit EndToEndModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  FeatureExtractor& extractor() { return extractor_; }
  const FeatureExtractor& extractor() const { return extractor_; }
  Head& head() { return *head_; }
  const Head& head() const { return *head_; }
  std::size_t out_steps() const { return head_->out_steps(); }

  // Kernel-side parameters of the temporal filter (empty when hand-crafted).
  std::vector<Parameter*> frontend_parameters() { return extractor_.bank().parameters(); }
  // Every trainable parameter: frontend filter, extractor norm, head.
  std::vector<Parameter*> parameters();
  void zero_grad();

  // Full persistent state (parameters, derived kernels, running statistics) in
  // checkpoint order.
  std::vector<NamedState> state();

  std::vector<LayerCount> count_parameters() const;

  // Evaluation-mode predictions [B x steps*3] for normalized or pooled rows.
  Matrix predict_from_pooled(const Matrix& pooled);

  // Call after mutating frontend parameters.
  void sync() { extractor_.sync(); }

private:
  ModelConfig config_;
  FeatureExtractor extractor_;
  std::unique_ptr<Head> head_;
};

// Test-time reduction of the multi-step output to one direction: the final step.
Vec3 window_prediction(std::span<const double> steps);

// Alternative reduction used for comparison: mean over steps.
Vec3 window_prediction_mean(std::span<const double> steps);

}  // namespace wdec
