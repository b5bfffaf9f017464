#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wdec/cwt.hpp"
#include "wdec/layers.hpp"

namespace wdec {

struct LayerCount {
  std::string layer;
  std::size_t parameters;
};

enum class HeadKind { mlp, cnn_lstm_mt };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

// Regression head over normalized features [B x 9600]. Outputs
// [B x steps*3], step-major.
class Head {
public:
  virtual ~Head() = default;
  virtual HeadKind kind() const = 0;
  virtual std::size_t out_steps() const = 0;
  virtual Matrix forward(const Matrix& features, bool training, Rng* rng) = 0;
  virtual Matrix backward(const Matrix& d_out) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
  // Batch-norm running statistics, in checkpoint order.
  virtual std::vector<std::vector<double>*> buffers() = 0;
  virtual std::vector<LayerCount> layer_counts() const = 0;
};

struct HeadConfig {
  double dropout = 0.5;
  std::uint64_t seed = 0;
};

// Flatten -> 9600x50 -> BatchNorm -> ReLU -> Dropout -> 50x50 -> ReLU -> Dropout -> 50x3.
// Flatten order is (channel, band, step), row-major.
class MlpHead final : public Head {
public:
  explicit MlpHead(HeadConfig config = {});

  HeadKind kind() const override { return HeadKind::mlp; }
  std::size_t out_steps() const override { return 1; }
  Matrix forward(const Matrix& features, bool training, Rng* rng) override;
  Matrix backward(const Matrix& d_out) override;
  std::vector<Parameter*> parameters() override;
  std::vector<std::vector<double>*> buffers() override;
  std::vector<LayerCount> layer_counts() const override;

  Linear fc1;
  BatchNorm bn;
  Linear fc2;
  Linear fc3;
  Dropout drop1;
  Dropout drop2;

private:
  Matrix relu1_;
  Matrix relu2_;
};

// Per-implant spatial convolutions over the 8x4 electrode grid (weights shared
// by both implants), then two stacked LSTMs across the 10 pooled steps. Every
// step emits a 3-vector.
class CnnLstmHead final : public Head {
public:
  explicit CnnLstmHead(HeadConfig config = {});

  HeadKind kind() const override { return HeadKind::cnn_lstm_mt; }
  std::size_t out_steps() const override { return kSteps; }
  Matrix forward(const Matrix& features, bool training, Rng* rng) override;
  Matrix backward(const Matrix& d_out) override;
  std::vector<Parameter*> parameters() override;
  std::vector<std::vector<double>*> buffers() override;
  std::vector<LayerCount> layer_counts() const override;

  // Feature rows -> conv samples [B*2*10 x 15*8*4], sample index (b*2 + implant)*10 + t.
  static Matrix to_grid(const Matrix& features);
  static Matrix from_grid(const Matrix& grid, Eigen::Index batch);

  // Intermediate activations from the last forward pass, for shape checks.
  const Matrix& conv1_output() const { return conv1_out_; }
  const Matrix& conv2_output() const { return conv2_out_; }

  Conv2d conv1;
  BatchNorm bn;
  Conv2d conv2;
  Lstm lstm1;
  Lstm lstm2;
  Dropout drop1;
  Dropout drop2;

private:
  Matrix conv1_out_;
  Matrix conv2_out_;
  Matrix relu1_mask_;
  Matrix relu2_mask_;
  Eigen::Index batch_ = 0;
};

std::unique_ptr<Head> make_head(HeadKind kind, HeadConfig config = {});

}  // namespace wdec
