#include "wdec/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wdec/error.hpp"
#include "wdec/loss.hpp"

namespace wdec {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay", "must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size", "must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs", "must be positive");
  if (patience == 0) throw ConfigError("patience", "must be positive");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw ConfigError("valid_fraction", "must lie in (0, 1)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"pretrain_freeze_epochs", pretrain_freeze_epochs},
          {"valid_fraction", valid_fraction},
          {"chronological_split", chronological_split},
          {"seed", seed},
          {"weight_decay_exempt", {"batch-norm", "biases", "cfo-frequencies"}}};
}

Split split_train_valid(std::size_t n_windows, double valid_fraction, std::uint64_t seed, bool chronological) {
  if (n_windows < 10) throw ShapeError("windows", "train/valid split needs at least 10 windows, got " + std::to_string(n_windows));
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw ConfigError("valid_fraction", "must lie in (0, 1)");
  auto n_valid = static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(n_windows)));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n_windows - 1);

  std::vector<std::size_t> order(n_windows);
  std::iota(order.begin(), order.end(), 0);
  if (!chronological) {
    Rng rng(derive_seed(seed, {0x73706c6974ULL}));
    std::shuffle(order.begin(), order.end(), rng);
  }
  Split s;
  const auto cut = static_cast<std::ptrdiff_t>(n_windows - n_valid);
  s.train.assign(order.begin(), order.begin() + cut);
  s.valid.assign(order.begin() + cut, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  return s;
}

bool EarlyStopper::update(double loss, std::size_t epoch) {
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epoch;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

std::string TrainingCurve::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const bool cfo = !epochs.empty() && !epochs.front().frequencies.empty();
  os << "epoch,train_loss,valid_loss,valid_cs,frozen_flag";
  if (cfo)
    for (std::size_t j = 1; j <= kBands; ++j) os << ",f_" << j;
  os << "\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',' << e.valid_cs << ',' << (e.frozen ? 1 : 0);
    if (cfo)
      for (double f : e.frequencies) os << ',' << f;
    os << "\n";
  }
  return os.str();
}

PooledCache::PooledCache(FeatureExtractor& extractor, const Dataset& dataset) : rows_(dataset.size()) {
  auto data = std::make_shared<std::vector<float>>(rows_ * kPooledSize);
  std::vector<double> row(kPooledSize);
  for (std::size_t i = 0; i < rows_; ++i) {
    extractor.pooled(dataset.window(i), row);
    std::transform(row.begin(), row.end(), data->begin() + static_cast<std::ptrdiff_t>(i * kPooledSize),
                   [](double v) { return static_cast<float>(v); });
  }
  data_ = std::move(data);
}

void PooledCache::rows(std::span<const std::size_t> indices, Matrix& out) const {
  out.resize(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(kPooledSize));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows_) throw ShapeError("windows", "cached row out of range");
    const float* src = data_->data() + indices[r] * kPooledSize;
    for (std::size_t k = 0; k < kPooledSize; ++k) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = src[k];
  }
}

PooledCache PooledCache::prefix(std::size_t n) const {
  if (n > rows_) throw ShapeError("windows", "prefix longer than cache");
  PooledCache c;
  c.rows_ = n;
  c.data_ = data_;
  return c;
}

namespace {

bool use_cache(const EndToEndModel& model, const PooledCache* cache, const Dataset& dataset) {
  return cache != nullptr && !cache->empty() && cache->size() == dataset.size() &&
         !model.extractor().kernels_trainable();
}

void pooled_rows(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx, const PooledCache* cache,
                 const std::vector<DropoutMask>* masks, Matrix& out) {
  if (use_cache(model, cache, dataset)) {
    cache->rows(idx, out);
    return;
  }
  out.resize(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(kPooledSize));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const DropoutMask* m = masks != nullptr ? &(*masks)[r] : nullptr;
    model.extractor().pooled(dataset.window(idx[r]), {out.row(static_cast<Eigen::Index>(r)).data(), kPooledSize}, m);
  }
}

std::vector<std::size_t> all_indices(const Dataset& d) {
  std::vector<std::size_t> v(d.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

EvalResult evaluate(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> indices,
                    const PooledCache* cache, std::size_t batch_size) {
  std::vector<std::size_t> owned;
  if (indices.empty()) {
    owned = all_indices(dataset);
    indices = owned;
  }
  if (indices.empty()) throw ShapeError("windows", "cannot evaluate an empty partition");

  EvalResult res;
  const std::size_t steps = model.out_steps();
  double loss_sum = 0.0;
  Matrix pooled;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto idx = indices.subspan(start, std::min(batch_size, indices.size() - start));
    pooled_rows(model, dataset, idx, cache, nullptr, pooled);
    const Matrix pred = model.predict_from_pooled(pooled);
    const Matrix targets = target_rows(dataset, idx, steps);
    loss_sum += cosine_loss(targets, pred) * static_cast<double>(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto row = pred.row(static_cast<Eigen::Index>(r));
      const std::span<const double> steps_span(row.data(), static_cast<std::size_t>(row.size()));
      const Vec3 p = window_prediction(steps_span);
      res.predictions.push_back(p);
      res.mean_predictions.push_back(window_prediction_mean(steps_span));
      res.window_cs.push_back(cosine_similarity(dataset.windows[idx[r]].target.label(), p));
    }
  }
  res.loss = loss_sum / static_cast<double>(indices.size());
  res.mean_cs = std::accumulate(res.window_cs.begin(), res.window_cs.end(), 0.0) / static_cast<double>(res.window_cs.size());
  return res;
}

std::vector<std::vector<double>> snapshot(EndToEndModel& model) {
  std::vector<std::vector<double>> out;
  for (const auto& s : model.state()) out.push_back(*s.values);
  return out;
}

void restore(EndToEndModel& model, const std::vector<std::vector<double>>& snap) {
  auto st = model.state();
  if (st.size() != snap.size()) throw ShapeError("snapshot", "state layout mismatch");
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (st[i].values->size() != snap[i].size()) throw ShapeError(st[i].name, "snapshot size mismatch");
    *st[i].values = snap[i];
  }
  model.sync();
}

TrainingCurve fit(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> train_idx,
                  std::span<const std::size_t> valid_idx, const TrainConfig& config, const PooledCache* cache,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_idx.empty()) throw ShapeError("windows", "empty training set");
  if (valid_idx.empty()) throw ShapeError("windows", "empty validation set");

  Adam adam({config.learning_rate, config.weight_decay});
  EarlyStopper stopper(config.patience);
  TrainingCurve curve;
  std::vector<std::vector<double>> best = snapshot(model);
  const std::size_t steps = model.out_steps();
  const bool trainable_kernels = model.extractor().kernels_trainable();
  const bool cfo = model.extractor().bank().mode() == FilterMode::cfo;
  const double extractor_dropout = model.extractor().dropout_rate();

  std::vector<std::size_t> order(train_idx.begin(), train_idx.end());
  Matrix pooled;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const bool frozen = !trainable_kernels || epoch <= config.pretrain_freeze_epochs;
    Rng rng(derive_seed(config.seed, {0x65706fULL, epoch}));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Parameter*> params;
    const auto fp = model.frontend_parameters();
    for (auto* p : model.parameters()) {
      const bool is_frontend = std::find(fp.begin(), fp.end(), p) != fp.end();
      if (!(frozen && is_frontend)) params.push_back(p);
    }

    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      if (n < 2 && order.size() >= 2) break;  // batch statistics need two rows
      const std::span<const std::size_t> idx(order.data() + start, n);

      std::vector<DropoutMask> masks;
      if (trainable_kernels && extractor_dropout > 0.0)
        for (std::size_t r = 0; r < n; ++r)
          masks.push_back({extractor_dropout, derive_seed(config.seed, {0x6d61736bULL, epoch, batch_no, r})});

      model.zero_grad();
      pooled_rows(model, dataset, idx, cache, masks.empty() ? nullptr : &masks, pooled);
      const Matrix normalized = model.extractor().normalize(pooled, true);
      const Matrix pred = model.head().forward(normalized, true, &rng);
      const Matrix targets = target_rows(dataset, idx, steps);
      const LossGrad lg = cosine_loss_grad(targets, pred);
      if (!std::isfinite(lg.loss)) throw NumericError("loss", "non-finite training loss at epoch " + std::to_string(epoch));

      const Matrix d_norm = model.head().backward(lg.grad);
      const Matrix d_pooled = model.extractor().normalize_backward(d_norm);
      if (!frozen) {
        for (std::size_t r = 0; r < n; ++r)
          model.extractor().backward_kernels(dataset.window(idx[r]),
                                             {d_pooled.row(static_cast<Eigen::Index>(r)).data(), kPooledSize},
                                             masks.empty() ? nullptr : &masks[r]);
        model.extractor().finish_backward();
      }
      adam.step(params);
      if (!frozen) model.sync();

      loss_sum += lg.loss * static_cast<double>(n);
      seen += n;
    }

    const EvalResult val = evaluate(model, dataset, valid_idx, cache, config.batch_size);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    rec.valid_loss = val.loss;
    rec.valid_cs = val.mean_cs;
    rec.frozen = frozen;
    if (cfo) rec.frequencies = model.extractor().bank().frequencies();
    if (hooks.on_epoch) hooks.on_epoch(rec, model);
    curve.epochs.push_back(rec);

    if (stopper.update(val.loss, epoch)) best = snapshot(model);
    if (stopper.should_stop()) {
      curve.stopped_early = true;
      break;
    }
  }
  curve.best_epoch = stopper.best_epoch();
  curve.clamp_events = model.extractor().bank().clamp_events();
  restore(model, best);
  return curve;
}

TrainingCurve train(EndToEndModel& model, const Dataset& dataset, const TrainConfig& config, const PooledCache* cache,
                    const TrainHooks& hooks) {
  if (dataset.size() == 0) throw ShapeError("windows", "empty training set");
  const Split split = split_train_valid(dataset.size(), config.valid_fraction, config.seed, config.chronological_split);
  return fit(model, dataset, split.train, split.valid, config, cache, hooks);
}

}  // namespace wdec
