#include "wdec/layers.hpp"

#include <cmath>

#include "wdec/error.hpp"

namespace wdec {

void init_uniform_fan_in(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : p.value) v = u(rng);
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(const std::string& name, std::size_t channels, double eps, double momentum)
    : gamma(name + ".gamma", ParamKind::norm, channels),
      beta(name + ".beta", ParamKind::norm, channels),
      running_mean(channels, 0.0),
      running_var(channels, 1.0),
      eps(eps),
      momentum(momentum) {
  std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
}

void BatchNorm::forward(std::span<const double> in, std::span<double> out, std::size_t outer, std::size_t inner,
                        bool training) {
  const std::size_t C = channels();
  if (in.size() != outer * C * inner || out.size() != in.size())
    throw ShapeError(gamma.name, "batch-norm input size mismatch");
  outer_ = outer;
  inner_ = inner;
  training_ = training;
  xhat_.resize(in.size());
  inv_std_.assign(C, 0.0);
  const double m = static_cast<double>(outer * inner);

  for (std::size_t c = 0; c < C; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (training) {
      for (std::size_t o = 0; o < outer; ++o) {
        const double* p = in.data() + (o * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) mean += p[i];
      }
      mean /= m;
      for (std::size_t o = 0; o < outer; ++o) {
        const double* p = in.data() + (o * C + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) var += (p[i] - mean) * (p[i] - mean);
      }
      var /= m;
      const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * unbiased;
    } else {
      mean = running_mean[c];
      var = running_var[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps);
    inv_std_[c] = inv_std;
    const double g = gamma.value[c];
    const double b = beta.value[c];
    for (std::size_t o = 0; o < outer; ++o) {
      const std::size_t off = (o * C + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double xh = (in[off + i] - mean) * inv_std;
        xhat_[off + i] = xh;
        out[off + i] = g * xh + b;
      }
    }
  }
}

void BatchNorm::backward(std::span<const double> d_out, std::span<double> d_in) {
  const std::size_t C = channels();
  const double m = static_cast<double>(outer_ * inner_);
  for (std::size_t c = 0; c < C; ++c) {
    double dgamma = 0.0;
    double dbeta = 0.0;
    for (std::size_t o = 0; o < outer_; ++o) {
      const std::size_t off = (o * C + c) * inner_;
      for (std::size_t i = 0; i < inner_; ++i) {
        dgamma += d_out[off + i] * xhat_[off + i];
        dbeta += d_out[off + i];
      }
    }
    gamma.grad[c] += dgamma;
    beta.grad[c] += dbeta;
    const double g = gamma.value[c];
    const double inv_std = inv_std_[c];
    for (std::size_t o = 0; o < outer_; ++o) {
      const std::size_t off = (o * C + c) * inner_;
      for (std::size_t i = 0; i < inner_; ++i) {
        if (training_)
          d_in[off + i] = g * inv_std / m * (m * d_out[off + i] - dbeta - xhat_[off + i] * dgamma);
        else
          d_in[off + i] = g * inv_std * d_out[off + i];
      }
    }
  }
}

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, std::size_t in, std::size_t out)
    : weight(name + ".weight", ParamKind::weight, out, in), bias(name + ".bias", ParamKind::bias, out) {}

void Linear::init(Rng& rng) {
  init_uniform_fan_in(weight, in_features(), rng);
  bias.zero_grad();
  std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

Matrix Linear::forward(const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != in_features())
    throw ShapeError(weight.name, "expected " + std::to_string(in_features()) + " inputs, got " + std::to_string(x.cols()));
  x_ = x;
  Matrix y = x * weight.mat().transpose();
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value.data(), static_cast<Eigen::Index>(bias.size()));
  return y;
}

Matrix Linear::backward(const Matrix& d_y) {
  weight.grad_mat().noalias() += d_y.transpose() * x_;
  Eigen::Map<Eigen::RowVectorXd>(bias.grad.data(), static_cast<Eigen::Index>(bias.size())) += d_y.colwise().sum();
  return d_y * weight.mat();
}

// ---------------------------------------------------------------- Dropout

void Dropout::forward(Matrix& x, bool training, Rng* rng) {
  applied_ = training && rate > 0.0 && rng != nullptr;
  if (!applied_) return;
  mask_.resize(x.rows(), x.cols());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask_.size(); ++i) mask_.data()[i] = u(*rng) < rate ? 0.0 : keep_scale;
  x.array() *= mask_.array();
}

void Dropout::backward(Matrix& d) const {
  if (applied_) d.array() *= mask_.array();
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(const std::string& name, ConvShape shape)
    : weight(name + ".weight", ParamKind::weight, shape.out_channels,
             shape.in_channels * ConvShape::kKernel * ConvShape::kKernel),
      bias(name + ".bias", ParamKind::bias, shape.out_channels),
      shape_(shape) {}

void Conv2d::init(Rng& rng) {
  init_uniform_fan_in(weight, weight.cols, rng);
  std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

void Conv2d::im2col(const double* sample, double* cols) const {
  const auto& s = shape_;
  const std::size_t K = ConvShape::kKernel;
  const std::size_t width = s.in_channels * K * K;
  for (std::size_t oy = 0; oy < s.out_height(); ++oy) {
    for (std::size_t ox = 0; ox < s.out_width(); ++ox) {
      double* row = cols + (oy * s.out_width() + ox) * width;
      for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
        for (std::size_t ky = 0; ky < K; ++ky) {
          for (std::size_t kx = 0; kx < K; ++kx) {
            const long y = static_cast<long>(oy + ky) - static_cast<long>(s.pad_h);
            const long x = static_cast<long>(ox + kx) - static_cast<long>(s.pad_w);
            const bool inside = y >= 0 && x >= 0 && y < static_cast<long>(s.height) && x < static_cast<long>(s.width);
            row[(ci * K + ky) * K + kx] =
                inside ? sample[(ci * s.height + static_cast<std::size_t>(y)) * s.width + static_cast<std::size_t>(x)] : 0.0;
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const double* cols, double* sample) const {
  const auto& s = shape_;
  const std::size_t K = ConvShape::kKernel;
  const std::size_t width = s.in_channels * K * K;
  for (std::size_t oy = 0; oy < s.out_height(); ++oy) {
    for (std::size_t ox = 0; ox < s.out_width(); ++ox) {
      const double* row = cols + (oy * s.out_width() + ox) * width;
      for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
        for (std::size_t ky = 0; ky < K; ++ky) {
          for (std::size_t kx = 0; kx < K; ++kx) {
            const long y = static_cast<long>(oy + ky) - static_cast<long>(s.pad_h);
            const long x = static_cast<long>(ox + kx) - static_cast<long>(s.pad_w);
            if (y < 0 || x < 0 || y >= static_cast<long>(s.height) || x >= static_cast<long>(s.width)) continue;
            sample[(ci * s.height + static_cast<std::size_t>(y)) * s.width + static_cast<std::size_t>(x)] +=
                row[(ci * K + ky) * K + kx];
          }
        }
      }
    }
  }
}

namespace {
constexpr Eigen::Index kConvChunk = 256;
}

Matrix Conv2d::forward(const Matrix& x) {
  const auto& s = shape_;
  const auto in_size = static_cast<Eigen::Index>(s.in_channels * s.height * s.width);
  if (x.cols() != in_size) throw ShapeError(weight.name, "convolution input size mismatch");
  x_ = x;
  const auto positions = static_cast<Eigen::Index>(s.out_height() * s.out_width());
  const auto width = static_cast<Eigen::Index>(weight.cols);
  const auto cout = static_cast<Eigen::Index>(s.out_channels);
  Matrix y(x.rows(), cout * positions);
  Matrix cols;
  Matrix out;
  for (Eigen::Index start = 0; start < x.rows(); start += kConvChunk) {
    const Eigen::Index n = std::min(kConvChunk, x.rows() - start);
    cols.resize(n * positions, width);
    for (Eigen::Index i = 0; i < n; ++i) im2col(x.row(start + i).data(), cols.data() + i * positions * width);
    out.noalias() = cols * weight.mat().transpose();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index co = 0; co < cout; ++co)
        for (Eigen::Index p = 0; p < positions; ++p)
          y(start + i, co * positions + p) = out(i * positions + p, co) + bias.value[static_cast<std::size_t>(co)];
  }
  return y;
}

Matrix Conv2d::backward(const Matrix& d_y) {
  const auto& s = shape_;
  const auto positions = static_cast<Eigen::Index>(s.out_height() * s.out_width());
  const auto width = static_cast<Eigen::Index>(weight.cols);
  const auto cout = static_cast<Eigen::Index>(s.out_channels);
  Matrix d_x = Matrix::Zero(x_.rows(), x_.cols());
  Matrix cols;
  Matrix d_out;
  Matrix d_cols;
  for (Eigen::Index start = 0; start < x_.rows(); start += kConvChunk) {
    const Eigen::Index n = std::min(kConvChunk, x_.rows() - start);
    cols.resize(n * positions, width);
    d_out.resize(n * positions, cout);
    for (Eigen::Index i = 0; i < n; ++i) {
      im2col(x_.row(start + i).data(), cols.data() + i * positions * width);
      for (Eigen::Index co = 0; co < cout; ++co)
        for (Eigen::Index p = 0; p < positions; ++p) d_out(i * positions + p, co) = d_y(start + i, co * positions + p);
    }
    weight.grad_mat().noalias() += d_out.transpose() * cols;
    const Eigen::RowVectorXd db = d_out.colwise().sum();
    for (Eigen::Index co = 0; co < cout; ++co) bias.grad[static_cast<std::size_t>(co)] += db[co];
    d_cols.noalias() = d_out * weight.mat();
    for (Eigen::Index i = 0; i < n; ++i) col2im(d_cols.data() + i * positions * width, d_x.row(start + i).data());
  }
  return d_x;
}

// ---------------------------------------------------------------- Lstm

Lstm::Lstm(const std::string& name, std::size_t input, std::size_t hidden)
    : w_ih(name + ".weight_ih", ParamKind::weight, 4 * hidden, input),
      w_hh(name + ".weight_hh", ParamKind::weight, 4 * hidden, hidden),
      b_ih(name + ".bias_ih", ParamKind::bias, 4 * hidden),
      b_hh(name + ".bias_hh", ParamKind::bias, 4 * hidden) {}

void Lstm::init(Rng& rng) {
  init_uniform_fan_in(w_ih, input_size(), rng);
  init_uniform_fan_in(w_hh, hidden_size(), rng);
  std::fill(b_ih.value.begin(), b_ih.value.end(), 0.0);
  std::fill(b_hh.value.begin(), b_hh.value.end(), 0.0);
}

namespace {
inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
}  // namespace

std::vector<Matrix> Lstm::forward(const std::vector<Matrix>& seq) {
  const auto H = static_cast<Eigen::Index>(hidden_size());
  const std::size_t T = seq.size();
  if (T == 0) throw ShapeError(w_ih.name, "empty sequence");
  const Eigen::Index B = seq[0].rows();
  x_ = seq;
  gates_.assign(T, Matrix());
  c_.assign(T + 1, Matrix::Zero(B, H));
  h_.assign(T + 1, Matrix::Zero(B, H));

  Eigen::RowVectorXd bias(4 * H);
  for (Eigen::Index k = 0; k < 4 * H; ++k)
    bias[k] = b_ih.value[static_cast<std::size_t>(k)] + b_hh.value[static_cast<std::size_t>(k)];

  for (std::size_t t = 0; t < T; ++t) {
    if (static_cast<std::size_t>(seq[t].cols()) != input_size()) throw ShapeError(w_ih.name, "input size mismatch");
    Matrix a = seq[t] * w_ih.mat().transpose();
    a.noalias() += h_[t] * w_hh.mat().transpose();
    a.rowwise() += bias;
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index k = 0; k < H; ++k) {
        const double i = sigmoid(a(b, k));
        const double f = sigmoid(a(b, H + k));
        const double g = std::tanh(a(b, 2 * H + k));
        const double o = sigmoid(a(b, 3 * H + k));
        a(b, k) = i;
        a(b, H + k) = f;
        a(b, 2 * H + k) = g;
        a(b, 3 * H + k) = o;
        const double c = f * c_[t](b, k) + i * g;
        c_[t + 1](b, k) = c;
        h_[t + 1](b, k) = o * std::tanh(c);
      }
    }
    gates_[t] = std::move(a);
  }
  return {h_.begin() + 1, h_.end()};
}

std::vector<Matrix> Lstm::backward(const std::vector<Matrix>& d_h) {
  const auto H = static_cast<Eigen::Index>(hidden_size());
  const std::size_t T = x_.size();
  const Eigen::Index B = x_[0].rows();
  std::vector<Matrix> d_x(T);
  Matrix dh_next = Matrix::Zero(B, H);
  Matrix dc_next = Matrix::Zero(B, H);
  Matrix da(B, 4 * H);
  Eigen::RowVectorXd dbias = Eigen::RowVectorXd::Zero(4 * H);

  for (std::size_t tt = T; tt-- > 0;) {
    const Matrix& g = gates_[tt];
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index k = 0; k < H; ++k) {
        const double i = g(b, k);
        const double f = g(b, H + k);
        const double gg = g(b, 2 * H + k);
        const double o = g(b, 3 * H + k);
        const double c = c_[tt + 1](b, k);
        const double tc = std::tanh(c);
        const double dh = d_h[tt](b, k) + dh_next(b, k);
        const double dc = dc_next(b, k) + dh * o * (1.0 - tc * tc);
        da(b, k) = dc * gg * i * (1.0 - i);
        da(b, H + k) = dc * c_[tt](b, k) * f * (1.0 - f);
        da(b, 2 * H + k) = dc * i * (1.0 - gg * gg);
        da(b, 3 * H + k) = dh * tc * o * (1.0 - o);
        dc_next(b, k) = dc * f;
      }
    }
    w_ih.grad_mat().noalias() += da.transpose() * x_[tt];
    w_hh.grad_mat().noalias() += da.transpose() * h_[tt];
    dbias += da.colwise().sum();
    d_x[tt] = da * w_ih.mat();
    dh_next = da * w_hh.mat();
  }
  for (Eigen::Index k = 0; k < 4 * H; ++k) {
    b_ih.grad[static_cast<std::size_t>(k)] += dbias[k];
    b_hh.grad[static_cast<std::size_t>(k)] += dbias[k];
  }
  return d_x;
}

}  // namespace wdec
