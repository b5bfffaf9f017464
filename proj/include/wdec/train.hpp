#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "wdec/adam.hpp"
#include "wdec/data.hpp"
#include "wdec/model.hpp"

namespace wdec {

struct TrainConfig {
  double learning_rate = 0.001;
  double weight_decay = 0.01;
  std::size_t batch_size = 200;
  std::size_t max_epochs = 55;
  std::size_t patience = 20;
  std::size_t pretrain_freeze_epochs = 5;
  double valid_fraction = 0.1;
  bool chronological_split = false;  // random window-level split leaks across overlapping windows
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
};

// Window-level split of [0, n): seeded uniform by default, or the trailing
// fraction when chronological.
Split split_train_valid(std::size_t n_windows, double valid_fraction, std::uint64_t seed, bool chronological = false);

class EarlyStopper {
public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Returns true when `loss` improves on the best seen so far.
  bool update(double loss, std::size_t epoch);
  bool should_stop() const { return since_improvement_ >= patience_; }

  double best_loss() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }
  std::size_t epochs_since_improvement() const { return since_improvement_; }

private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t since_improvement_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_cs = 0.0;
  bool frozen = false;
  std::vector<double> frequencies;  // CFO only
};

struct TrainingCurve {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  std::size_t clamp_events = 0;

  std::string to_csv() const;
};

// Pooled (pre-normalization) extractor output for every window of a dataset,
// computed once with the current kernels and no dropout. Stored as float.
class PooledCache {
public:
  PooledCache() = default;
  PooledCache(FeatureExtractor& extractor, const Dataset& dataset);

  bool empty() const { return rows_ == 0; }
  std::size_t size() const { return rows_; }
  void rows(std::span<const std::size_t> indices, Matrix& out) const;
  // Cache for the first n windows (e.g. a leading-session subset); shares storage.
  PooledCache prefix(std::size_t n) const;

private:
  std::size_t rows_ = 0;
  std::shared_ptr<const std::vector<float>> data_;
};

struct EvalResult {
  double loss = 0.0;     // training objective (all steps for multi-step heads)
  double mean_cs = 0.0;  // window-level CS of the final-step prediction
  std::vector<double> window_cs;
  std::vector<Vec3> predictions;  // final-step
  std::vector<Vec3> mean_predictions;  // mean over steps
};

// Evaluation-mode pass over `indices` (all windows when empty). Uses `cache`
// only when the model's kernels are fixed.
EvalResult evaluate(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> indices = {},
                    const PooledCache* cache = nullptr, std::size_t batch_size = 200);

struct TrainHooks {
  // Called after every epoch (after validation), before early-stopping bookkeeping.
  std::function<void(const EpochRecord&, EndToEndModel&)> on_epoch;
};

// Trains on dataset[train_idx], monitors dataset[valid_idx], restores the best
// validation snapshot.
TrainingCurve fit(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> train_idx,
                  std::span<const std::size_t> valid_idx, const TrainConfig& config, const PooledCache* cache = nullptr,
                  const TrainHooks& hooks = {});

// Splits `dataset` with config.valid_fraction and trains.
TrainingCurve train(EndToEndModel& model, const Dataset& dataset, const TrainConfig& config,
                    const PooledCache* cache = nullptr, const TrainHooks& hooks = {});

// Flat copy of the model's persistent state.
std::vector<std::vector<double>> snapshot(EndToEndModel& model);
void restore(EndToEndModel& model, const std::vector<std::vector<double>>& snap);

}  // namespace wdec
