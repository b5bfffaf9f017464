#pragma once

#include "wdec/data.hpp"
#include "wdec/param.hpp"

namespace wdec {

// cos of the angle between desired and predicted directions. Zero-norm input
// is an error.
double cosine_similarity(const Vec3& y, const Vec3& y_hat);

struct LossGrad {
  double loss = 0.0;  // mean over rows and steps of 1 - CS
  Matrix grad;        // d loss / d predictions
};

// targets and predictions are [B x steps*3]; the loss averages over every
// (row, step) pair.
double cosine_loss(const Matrix& targets, const Matrix& predictions);
LossGrad cosine_loss_grad(const Matrix& targets, const Matrix& predictions);

// Target rows for a model emitting `steps` directions per window (1 -> label only).
Matrix target_rows(const Dataset& dataset, std::span<const std::size_t> indices, std::size_t steps);

}  // namespace wdec
