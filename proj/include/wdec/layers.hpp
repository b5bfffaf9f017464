#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wdec/param.hpp"
#include "wdec/random.hpp"

namespace wdec {

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) fill.
void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng);

// Normalization over the middle axis of a contiguous [outer x channels x inner]
// block. Batch statistics in training (biased variance for the transform,
// unbiased for the running estimate), running statistics otherwise.
class BatchNorm {
public:
  BatchNorm(const std::string& name, std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  void forward(std::span<const double> in, std::span<double> out, std::size_t outer, std::size_t inner, bool training);
  // Accumulates gamma/beta gradients and writes d_in.
  void backward(std::span<const double> d_out, std::span<double> d_in);

  std::size_t channels() const { return gamma.size(); }
  std::vector<Parameter*> parameters() { return {&gamma, &beta}; }

  Parameter gamma;
  Parameter beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double eps;
  double momentum;

private:
  std::vector<double> xhat_;
  std::vector<double> inv_std_;
  std::size_t outer_ = 0;
  std::size_t inner_ = 0;
  bool training_ = false;
};

class Linear {
public:
  Linear(const std::string& name, std::size_t in, std::size_t out);

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& d_y);
  void init(Rng& rng);

  std::size_t in_features() const { return weight.cols; }
  std::size_t out_features() const { return weight.rows; }
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }

  Parameter weight;  // [out x in]
  Parameter bias;

private:
  Matrix x_;
};

// Inverted dropout with a stored mask.
class Dropout {
public:
  explicit Dropout(double rate = 0.5) : rate(rate) {}
  void forward(Matrix& x, bool training, Rng* rng);
  void backward(Matrix& d) const;
  double rate;

private:
  Matrix mask_;
  bool applied_ = false;
};

struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t height;
  std::size_t width;
  std::size_t pad_h;
  std::size_t pad_w;
  static constexpr std::size_t kKernel = 3;
  std::size_t out_height() const { return height + 2 * pad_h - kKernel + 1; }
  std::size_t out_width() const { return width + 2 * pad_w - kKernel + 1; }
};

// 3x3 spatial convolution (cross-correlation), zero padding per axis.
// Samples are rows: input [N x C_in*H*W], output [N x C_out*H_out*W_out],
// channel-major inside a row.
class Conv2d {
public:
  Conv2d(const std::string& name, ConvShape shape);

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& d_y);
  void init(Rng& rng);

  const ConvShape& shape() const { return shape_; }
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }

  Parameter weight;  // [C_out x C_in*9]
  Parameter bias;

private:
  void im2col(const double* sample, double* cols) const;
  void col2im(const double* cols, double* sample) const;

  ConvShape shape_;
  Matrix x_;
};

// Gated recurrent layer (input, forget, cell, output gates; PyTorch layout)
// with separate input and recurrent biases.
class Lstm {
public:
  Lstm(const std::string& name, std::size_t input, std::size_t hidden);

  // seq: T matrices [B x input]; returns T hidden states [B x hidden].
  std::vector<Matrix> forward(const std::vector<Matrix>& seq);
  std::vector<Matrix> backward(const std::vector<Matrix>& d_h);
  void init(Rng& rng);

  std::size_t input_size() const { return w_ih.cols; }
  std::size_t hidden_size() const { return w_hh.cols; }
  std::vector<Parameter*> parameters() { return {&w_ih, &w_hh, &b_ih, &b_hh}; }

  Parameter w_ih;  // [4H x input]
  Parameter w_hh;  // [4H x H]
  Parameter b_ih;
  Parameter b_hh;

private:
  std::vector<Matrix> x_;
  std::vector<Matrix> gates_;  // activated [i f g o], [B x 4H]
  std::vector<Matrix> c_;      // c_t, with c_{-1} = 0 at index 0 shifted by one
  std::vector<Matrix> h_;
};

}  // namespace wdec
