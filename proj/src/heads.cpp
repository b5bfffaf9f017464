#include "wdec/heads.hpp"

#include "wdec/error.hpp"

namespace wdec {

std::string to_string(HeadKind kind) { return kind == HeadKind::mlp ? "mlp" : "cnn-lstm-mt"; }

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "mlp") return HeadKind::mlp;
  if (name == "cnn-lstm-mt") return HeadKind::cnn_lstm_mt;
  throw ConfigError("model", "unknown model '" + name + "' (expected mlp or cnn-lstm-mt)");
}

namespace {

std::size_t total(std::initializer_list<const Parameter*> ps) {
  std::size_t n = 0;
  for (const auto* p : ps) n += p->size();
  return n;
}

void check_features(const Matrix& f) {
  if (static_cast<std::size_t>(f.cols()) != kPooledSize)
    throw ShapeError("features", "expected rows of 64x15x10 = 9600 values, got " + std::to_string(f.cols()));
}

}  // namespace

// ---------------------------------------------------------------- MLP

MlpHead::MlpHead(HeadConfig config)
    : fc1("mlp.fc1", kPooledSize, 50),
      bn("mlp.bn", 50),
      fc2("mlp.fc2", 50, 50),
      fc3("mlp.fc3", 50, 3),
      drop1(config.dropout),
      drop2(config.dropout) {
  Rng rng(derive_seed(config.seed, {0x6d6c70ULL}));
  fc1.init(rng);
  fc2.init(rng);
  fc3.init(rng);
}

Matrix MlpHead::forward(const Matrix& features, bool training, Rng* rng) {
  check_features(features);
  Matrix h = fc1.forward(features);
  Matrix n(h.rows(), h.cols());
  bn.forward({h.data(), static_cast<std::size_t>(h.size())}, {n.data(), static_cast<std::size_t>(n.size())},
             static_cast<std::size_t>(h.rows()), 1, training);
  relu1_ = n.cwiseMax(0.0);
  Matrix a = relu1_;
  drop1.forward(a, training, rng);
  relu2_ = fc2.forward(a).cwiseMax(0.0);
  Matrix b = relu2_;
  drop2.forward(b, training, rng);
  return fc3.forward(b);
}

Matrix MlpHead::backward(const Matrix& d_out) {
  Matrix d = fc3.backward(d_out);
  drop2.backward(d);
  d = (relu2_.array() > 0.0).select(d, 0.0);
  d = fc2.backward(d);
  drop1.backward(d);
  d = (relu1_.array() > 0.0).select(d, 0.0);
  Matrix d_h(d.rows(), d.cols());
  bn.backward({d.data(), static_cast<std::size_t>(d.size())}, {d_h.data(), static_cast<std::size_t>(d_h.size())});
  return fc1.backward(d_h);
}

std::vector<Parameter*> MlpHead::parameters() {
  return {&fc1.weight, &fc1.bias, &bn.gamma, &bn.beta, &fc2.weight, &fc2.bias, &fc3.weight, &fc3.bias};
}

std::vector<std::vector<double>*> MlpHead::buffers() { return {&bn.running_mean, &bn.running_var}; }

std::vector<LayerCount> MlpHead::layer_counts() const {
  return {{"fc1", total({&fc1.weight, &fc1.bias})},
          {"bn", total({&bn.gamma, &bn.beta})},
          {"fc2", total({&fc2.weight, &fc2.bias})},
          {"fc3", total({&fc3.weight, &fc3.bias})}};
}

// ---------------------------------------------------------------- CNN + LSTM + MT

namespace {
constexpr std::size_t kGridRows = 8;
constexpr std::size_t kGridCols = 4;
constexpr std::size_t kImplants = 2;
constexpr std::size_t kGridSample = kBands * kGridRows * kGridCols;  // 480
}  // namespace

CnnLstmHead::CnnLstmHead(HeadConfig config)
    : conv1("cnn.conv1", {kBands, 32, kGridRows, kGridCols, 0, 1}),
      bn("cnn.bn", 32),
      conv2("cnn.conv2", {32, 64, 6, 4, 0, 0}),
      lstm1("cnn.lstm1", 1024, 50),
      lstm2("cnn.lstm2", 50, 3),
      drop1(config.dropout),
      drop2(config.dropout) {
  Rng rng(derive_seed(config.seed, {0x636e6eULL}));
  conv1.init(rng);
  conv2.init(rng);
  lstm1.init(rng);
  lstm2.init(rng);
}

Matrix CnnLstmHead::to_grid(const Matrix& features) {
  const Eigen::Index B = features.rows();
  Matrix grid(B * static_cast<Eigen::Index>(kImplants * kSteps), static_cast<Eigen::Index>(kGridSample));
  for (Eigen::Index b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      const auto pos = GridLayout::position(c);
      for (std::size_t t = 0; t < kSteps; ++t) {
        const auto row = static_cast<Eigen::Index>((static_cast<std::size_t>(b) * kImplants + pos.implant) * kSteps + t);
        for (std::size_t j = 0; j < kBands; ++j) {
          const auto col = static_cast<Eigen::Index>((j * kGridRows + pos.row) * kGridCols + pos.col);
          grid(row, col) = features(b, static_cast<Eigen::Index>((c * kBands + j) * kSteps + t));
        }
      }
    }
  }
  return grid;
}

Matrix CnnLstmHead::from_grid(const Matrix& grid, Eigen::Index batch) {
  Matrix features(batch, static_cast<Eigen::Index>(kPooledSize));
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      const auto pos = GridLayout::position(c);
      for (std::size_t t = 0; t < kSteps; ++t) {
        const auto row = static_cast<Eigen::Index>((static_cast<std::size_t>(b) * kImplants + pos.implant) * kSteps + t);
        for (std::size_t j = 0; j < kBands; ++j) {
          const auto col = static_cast<Eigen::Index>((j * kGridRows + pos.row) * kGridCols + pos.col);
          features(b, static_cast<Eigen::Index>((c * kBands + j) * kSteps + t)) = grid(row, col);
        }
      }
    }
  }
  return features;
}

Matrix CnnLstmHead::forward(const Matrix& features, bool training, Rng* rng) {
  check_features(features);
  batch_ = features.rows();
  const Matrix grid = to_grid(features);

  Matrix c1 = conv1.forward(grid);
  relu1_mask_ = (c1.array() > 0.0).cast<double>();
  c1 = c1.cwiseMax(0.0);
  conv1_out_.resize(c1.rows(), c1.cols());
  bn.forward({c1.data(), static_cast<std::size_t>(c1.size())}, {conv1_out_.data(), static_cast<std::size_t>(conv1_out_.size())},
             static_cast<std::size_t>(c1.rows()), 6 * 4, training);
  Matrix a = conv1_out_;
  drop1.forward(a, training, rng);

  conv2_out_ = conv2.forward(a);
  relu2_mask_ = (conv2_out_.array() > 0.0).cast<double>();
  Matrix z = conv2_out_.cwiseMax(0.0);
  drop2.forward(z, training, rng);

  const Eigen::Index per_implant = z.cols();  // 64*4*2 = 512
  std::vector<Matrix> seq(kSteps, Matrix(batch_, per_implant * static_cast<Eigen::Index>(kImplants)));
  for (Eigen::Index b = 0; b < batch_; ++b)
    for (std::size_t p = 0; p < kImplants; ++p)
      for (std::size_t t = 0; t < kSteps; ++t)
        seq[t].row(b).segment(static_cast<Eigen::Index>(p) * per_implant, per_implant) =
            z.row(static_cast<Eigen::Index>((static_cast<std::size_t>(b) * kImplants + p) * kSteps + t));

  const auto h1 = lstm1.forward(seq);
  const auto h2 = lstm2.forward(h1);
  Matrix out(batch_, static_cast<Eigen::Index>(kSteps * 3));
  for (std::size_t t = 0; t < kSteps; ++t) out.middleCols(static_cast<Eigen::Index>(3 * t), 3) = h2[t];
  return out;
}

Matrix CnnLstmHead::backward(const Matrix& d_out) {
  std::vector<Matrix> d_h2(kSteps);
  for (std::size_t t = 0; t < kSteps; ++t) d_h2[t] = d_out.middleCols(static_cast<Eigen::Index>(3 * t), 3);
  const auto d_h1 = lstm2.backward(d_h2);
  const auto d_seq = lstm1.backward(d_h1);

  const Eigen::Index per_implant = conv2_out_.cols();
  Matrix d_z(conv2_out_.rows(), per_implant);
  for (Eigen::Index b = 0; b < batch_; ++b)
    for (std::size_t p = 0; p < kImplants; ++p)
      for (std::size_t t = 0; t < kSteps; ++t)
        d_z.row(static_cast<Eigen::Index>((static_cast<std::size_t>(b) * kImplants + p) * kSteps + t)) =
            d_seq[t].row(b).segment(static_cast<Eigen::Index>(p) * per_implant, per_implant);
  drop2.backward(d_z);
  d_z.array() *= relu2_mask_.array();
  Matrix d_a = conv2.backward(d_z);
  drop1.backward(d_a);
  Matrix d_c1(d_a.rows(), d_a.cols());
  bn.backward({d_a.data(), static_cast<std::size_t>(d_a.size())}, {d_c1.data(), static_cast<std::size_t>(d_c1.size())});
  d_c1.array() *= relu1_mask_.array();
  const Matrix d_grid = conv1.backward(d_c1);
  return from_grid(d_grid, batch_);
}

std::vector<Parameter*> CnnLstmHead::parameters() {
  return {&conv1.weight, &conv1.bias, &bn.gamma,    &bn.beta,     &conv2.weight, &conv2.bias,
          &lstm1.w_ih,   &lstm1.w_hh, &lstm1.b_ih,  &lstm1.b_hh,  &lstm2.w_ih,   &lstm2.w_hh,
          &lstm2.b_ih,   &lstm2.b_hh};
}

std::vector<std::vector<double>*> CnnLstmHead::buffers() { return {&bn.running_mean, &bn.running_var}; }

std::vector<LayerCount> CnnLstmHead::layer_counts() const {
  return {{"conv1", total({&conv1.weight, &conv1.bias})},
          {"bn", total({&bn.gamma, &bn.beta})},
          {"conv2", total({&conv2.weight, &conv2.bias})},
          {"lstm1", total({&lstm1.w_ih, &lstm1.w_hh, &lstm1.b_ih, &lstm1.b_hh})},
          {"lstm2", total({&lstm2.w_ih, &lstm2.w_hh, &lstm2.b_ih, &lstm2.b_hh})}};
}

std::unique_ptr<Head> make_head(HeadKind kind, HeadConfig config) {
  if (kind == HeadKind::mlp) return std::make_unique<MlpHead>(config);
  return std::make_unique<CnnLstmHead>(config);
}

}  // namespace wdec
