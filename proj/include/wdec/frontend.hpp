#pragma once

#include <span>
#include <string>
#include <vector>

#include "wdec/cwt.hpp"
#include "wdec/filterbank.hpp"
#include "wdec/layers.hpp"

namespace wdec {

// Normalized extractor output for one window, [64 channels x 15 bands x 10 steps].
struct FeatureTensor {
  std::vector<double> values = std::vector<double>(kPooledSize, 0.0);
  double at(std::size_t c, std::size_t j, std::size_t t) const { return values[(c * kBands + j) * kPoolBins + t]; }
};

// Temporal filtering -> modulus -> dropout -> 0.1 s average pool -> per-band
// batch normalization.
class FeatureExtractor {
public:
  explicit FeatureExtractor(Filterbank bank, double dropout_rate = 0.5);

  Filterbank& bank() { return bank_; }
  const Filterbank& bank() const { return bank_; }
  BatchNorm& norm() { return norm_; }
  const BatchNorm& norm() const { return norm_; }
  double dropout_rate() const { return dropout_; }

  bool kernels_trainable() const { return bank_.mode() != FilterMode::fixed; }

  // Re-derives CFO kernels and refreshes the transform after any parameter change.
  void sync();

  void pooled(const SignalWindow& window, std::span<double> out, const DropoutMask* mask = nullptr);
  void backward_kernels(const SignalWindow& window, std::span<const double> d_pooled, const DropoutMask* mask);
  // Folds kernel gradients into CFO frequencies; no-op in other modes.
  void finish_backward() { bank_.backprop_to_centre(); }

  // pooled rows [B x 9600] -> normalized rows, statistics per band.
  Matrix normalize(const Matrix& pooled, bool training);
  Matrix normalize_backward(const Matrix& d_out);

  std::vector<Parameter*> parameters();

  CwtEngine& engine() { return engine_; }

private:
  Filterbank bank_;
  BatchNorm norm_;
  double dropout_;
  CwtEngine engine_;
};

// Single-window evaluation-mode features using the extractor's running statistics.
FeatureTensor extract_features(FeatureExtractor& extractor, const SignalWindow& window);

}  // namespace wdec
