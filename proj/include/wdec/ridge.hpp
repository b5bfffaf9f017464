#pragma once

#include <span>
#include <vector>

#include "wdec/data.hpp"
#include "wdec/param.hpp"
#include "wdec/synth.hpp"

namespace wdec {

// Reference decoder built from the generator's own knowledge: the Hilbert
// envelope of each informative band, averaged over every 0.1 s block of the
// window ([channels x bands x 10] features), fed to closed-form ridge
// regression onto the window label.
class BandEnvelopeFeatures {
public:
  explicit BandEnvelopeFeatures(std::vector<Band> bands);

  std::size_t size() const { return kChannels * bands_.size() * kSteps; }
  std::vector<double> operator()(const SignalWindow& window) const;
  Matrix rows(const Dataset& dataset, std::span<const std::size_t> indices = {}) const;

private:
  std::vector<Band> bands_;
};

class RidgeRegression {
public:
  // Features are standardized internally; an intercept is always fitted.
  void fit(const Matrix& x, const Matrix& y, double lambda);
  Matrix predict(const Matrix& x) const;

private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
  Matrix weights_;
  Eigen::RowVectorXd intercept_;
};

struct RidgeOracleResult {
  double lambda = 0.0;
  double valid_cs = 0.0;
  double test_cs = 0.0;
};

// Picks lambda on a seeded 10% split of `train` (grid 10^-3..10^4 relative to
// the feature count), refits on all of `train`, reports mean CS on `test`.
RidgeOracleResult ridge_oracle(const Dataset& train, const Dataset& test, const std::vector<Band>& bands,
                               std::uint64_t seed = 0);
// Same, on precomputed feature rows and label rows [N x 3].
RidgeOracleResult ridge_oracle(const Matrix& x_train, const Matrix& y_train, const Matrix& x_test, const Matrix& y_test,
                               std::uint64_t seed = 0);

double mean_cosine(const Matrix& targets, const Matrix& predictions);

}  // namespace wdec
