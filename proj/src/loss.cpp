#include "wdec/loss.hpp"

#include <cmath>

#include "wdec/error.hpp"

namespace wdec {

namespace {
double norm3(const double* v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
}  // namespace

double cosine_similarity(const Vec3& y, const Vec3& y_hat) {
  const double ny = norm3(y.data());
  const double np = norm3(y_hat.data());
  if (!(ny > 0.0)) throw NumericError("target", "zero-norm target direction");
  if (!(np > 0.0)) throw NumericError("prediction", "zero-norm prediction");
  const double cs = (y[0] * y_hat[0] + y[1] * y_hat[1] + y[2] * y_hat[2]) / (ny * np);
  return std::clamp(cs, -1.0, 1.0);
}

double cosine_loss(const Matrix& targets, const Matrix& predictions) { return cosine_loss_grad(targets, predictions).loss; }

LossGrad cosine_loss_grad(const Matrix& targets, const Matrix& predictions) {
  if (targets.rows() != predictions.rows() || targets.cols() != predictions.cols() || targets.cols() % 3 != 0)
    throw ShapeError("predictions", "target/prediction shape mismatch");
  if (targets.rows() == 0) throw ShapeError("predictions", "empty batch");
  LossGrad out;
  out.grad.resize(predictions.rows(), predictions.cols());
  const double count = static_cast<double>(targets.rows() * (targets.cols() / 3));
  double total = 0.0;
  for (Eigen::Index r = 0; r < targets.rows(); ++r) {
    for (Eigen::Index s = 0; s < targets.cols(); s += 3) {
      const double* y = targets.row(r).data() + s;
      const double* p = predictions.row(r).data() + s;
      const double ny = norm3(y);
      const double np = norm3(p);
      if (!(ny > 0.0)) throw NumericError("target", "zero-norm target direction");
      if (!(np > 0.0)) throw NumericError("prediction", "zero-norm prediction");
      const double cs = (y[0] * p[0] + y[1] * p[1] + y[2] * p[2]) / (ny * np);
      total += 1.0 - cs;
      for (int a = 0; a < 3; ++a)
        out.grad(r, s + a) = -(y[a] / (ny * np) - cs * p[a] / (np * np)) / count;
    }
  }
  out.loss = total / count;
  return out;
}

Matrix target_rows(const Dataset& dataset, std::span<const std::size_t> indices, std::size_t steps) {
  Matrix t(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(3 * steps));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& traj = dataset.windows.at(indices[r]).target;
    for (std::size_t s = 0; s < steps; ++s) {
      const Vec3& v = steps == 1 ? traj.label() : traj.steps[s];
      for (std::size_t a = 0; a < 3; ++a) t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(3 * s + a)) = v[a];
    }
  }
  return t;
}

}  // namespace wdec
