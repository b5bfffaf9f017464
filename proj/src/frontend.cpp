#include "wdec/frontend.hpp"

namespace wdec {

FeatureExtractor::FeatureExtractor(Filterbank bank, double dropout_rate)
    : bank_(std::move(bank)), norm_("frontend.norm", kBands), dropout_(dropout_rate) {
  engine_.load(bank_);
}

void FeatureExtractor::sync() {
  bank_.regenerate();
  engine_.load(bank_);
}

void FeatureExtractor::pooled(const SignalWindow& window, std::span<double> out, const DropoutMask* mask) {
  engine_.pooled(window, out, mask);
}

void FeatureExtractor::backward_kernels(const SignalWindow& window, std::span<const double> d_pooled,
                                        const DropoutMask* mask) {
  engine_.backward(window, d_pooled, mask, bank_);
}

Matrix FeatureExtractor::normalize(const Matrix& pooled, bool training) {
  Matrix out(pooled.rows(), pooled.cols());
  norm_.forward({pooled.data(), static_cast<std::size_t>(pooled.size())}, {out.data(), static_cast<std::size_t>(out.size())},
                static_cast<std::size_t>(pooled.rows()) * kChannels, kPoolBins, training);
  return out;
}

Matrix FeatureExtractor::normalize_backward(const Matrix& d_out) {
  Matrix d_in(d_out.rows(), d_out.cols());
  norm_.backward({d_out.data(), static_cast<std::size_t>(d_out.size())}, {d_in.data(), static_cast<std::size_t>(d_in.size())});
  return d_in;
}

std::vector<Parameter*> FeatureExtractor::parameters() {
  auto p = bank_.parameters();
  for (auto* q : norm_.parameters()) p.push_back(q);
  return p;
}

FeatureTensor extract_features(FeatureExtractor& extractor, const SignalWindow& window) {
  Matrix pooled(1, static_cast<Eigen::Index>(kPooledSize));
  extractor.pooled(window, {pooled.data(), kPooledSize});
  const Matrix normalized = extractor.normalize(pooled, false);
  FeatureTensor t;
  std::copy(normalized.data(), normalized.data() + kPooledSize, t.values.begin());
  return t;
}

}  // namespace wdec
