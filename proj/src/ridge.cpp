#include "wdec/ridge.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "wdec/error.hpp"
#include "wdec/fft.hpp"
#include "wdec/loss.hpp"
#include "wdec/train.hpp"

namespace wdec {

BandEnvelopeFeatures::BandEnvelopeFeatures(std::vector<Band> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw ConfigError("bands", "at least one band is required");
}

std::vector<double> BandEnvelopeFeatures::operator()(const SignalWindow& window) const {
  const std::size_t n = kWindowSamples;
  const double df = kSampleRate / static_cast<double>(n);
  thread_local ComplexFft fft(kWindowSamples);
  std::vector<std::complex<double>> spec(n);
  std::vector<double> out(size(), 0.0);

  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto x = window.channel(c);
    auto buf = fft.data();
    for (std::size_t t = 0; t < n; ++t) buf[t] = {static_cast<double>(x[t]), 0.0};
    fft.forward();
    std::copy(buf.begin(), buf.end(), spec.begin());
    for (std::size_t b = 0; b < bands_.size(); ++b) {
      // Analytic band-limited signal: positive-frequency bins inside the band, doubled.
      for (std::size_t k = 0; k < n; ++k) {
        const double f = static_cast<double>(k) * df;
        const bool keep = k > 0 && k < (n + 1) / 2 && std::abs(f - bands_[b].center_hz) <= bands_[b].bandwidth_hz / 2.0;
        buf[k] = keep ? 2.0 * spec[k] / static_cast<double>(n) : std::complex<double>(0.0, 0.0);
      }
      fft.inverse();
      double* dst = out.data() + (c * bands_.size() + b) * kSteps;
      for (std::size_t t = 0; t < n; ++t) dst[t / kWindowStride] += std::abs(buf[t]) / static_cast<double>(kWindowStride);
    }
  }
  return out;
}

Matrix BandEnvelopeFeatures::rows(const Dataset& dataset, std::span<const std::size_t> indices) const {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    indices = all;
  }
  Matrix m(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto f = (*this)(dataset.window(indices[r]));
    for (std::size_t k = 0; k < f.size(); ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = f[k];
  }
  return m;
}

void RidgeRegression::fit(const Matrix& x, const Matrix& y, double lambda) {
  if (x.rows() != y.rows() || x.rows() < 2) throw ShapeError("ridge", "need matching rows, at least two");
  mean_ = x.colwise().mean();
  Matrix xc = x.rowwise() - mean_;
  scale_ = (xc.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
  for (Eigen::Index k = 0; k < scale_.size(); ++k)
    if (!(scale_[k] > 0.0)) scale_[k] = 1.0;
  xc = xc.array().rowwise() / scale_.array();
  intercept_ = y.colwise().mean();
  const Matrix yc = y.rowwise() - intercept_;
  Matrix gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  weights_ = gram.ldlt().solve(xc.transpose() * yc);
}

Matrix RidgeRegression::predict(const Matrix& x) const {
  Matrix xc = x.rowwise() - mean_;
  xc = xc.array().rowwise() / scale_.array();
  return (xc * weights_).rowwise() + intercept_;
}

double mean_cosine(const Matrix& targets, const Matrix& predictions) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    const Vec3 y{targets(r, 0), targets(r, 1), targets(r, 2)};
    const Vec3 p{predictions(r, 0), predictions(r, 1), predictions(r, 2)};
    sum += cosine_similarity(y, p);
  }
  return sum / static_cast<double>(targets.rows());
}

RidgeOracleResult ridge_oracle(const Matrix& x, const Matrix& y, const Matrix& x_test, const Matrix& y_test,
                               std::uint64_t seed) {
  const Split split = split_train_valid(static_cast<std::size_t>(x.rows()), 0.1, seed);
  auto take = [](const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(idx[r]));
    return out;
  };
  const Matrix xt = take(x, split.train), yt = take(y, split.train);
  const Matrix xv = take(x, split.valid), yv = take(y, split.valid);

  RidgeOracleResult best;
  best.valid_cs = -2.0;
  for (int e = -3; e <= 4; ++e) {
    const double lambda = std::pow(10.0, e) * static_cast<double>(x.cols()) / 100.0;
    RidgeRegression r;
    r.fit(xt, yt, lambda);
    const double cs = mean_cosine(yv, r.predict(xv));
    if (cs > best.valid_cs) {
      best.valid_cs = cs;
      best.lambda = lambda;
    }
  }
  RidgeRegression r;
  r.fit(x, y, best.lambda);
  best.test_cs = mean_cosine(y_test, r.predict(x_test));
  return best;
}

RidgeOracleResult ridge_oracle(const Dataset& train, const Dataset& test, const std::vector<Band>& bands,
                               std::uint64_t seed) {
  const BandEnvelopeFeatures features(bands);
  std::vector<std::size_t> train_idx(train.size()), test_idx(test.size());
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::iota(test_idx.begin(), test_idx.end(), 0);
  return ridge_oracle(features.rows(train, train_idx), target_rows(train, train_idx, 1), features.rows(test, test_idx),
                      target_rows(test, test_idx, 1), seed);
}

}  // namespace wdec
