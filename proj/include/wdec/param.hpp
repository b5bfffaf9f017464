#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wdec {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

// Weight decay applies only to `weight`; norm scales/shifts, biases and
// wavelet frequencies are exempt.
enum class ParamKind { weight, bias, norm, frequency };

struct Parameter {
  std::string name;
  ParamKind kind = ParamKind::weight;
  std::size_t rows = 0;
  std::size_t cols = 1;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, ParamKind k, std::size_t r, std::size_t c = 1)
      : name(std::move(n)), kind(k), rows(r), cols(c), value(r * c, 0.0), grad(r * c, 0.0) {}

  std::size_t size() const { return value.size(); }
  bool decays() const { return kind == ParamKind::weight; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  MatrixMap mat() { return {value.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)}; }
  ConstMatrixMap mat() const { return {value.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)}; }
  MatrixMap grad_mat() { return {grad.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)}; }
};

}  // namespace wdec
