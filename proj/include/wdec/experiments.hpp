#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wdec/data.hpp"
#include "wdec/model.hpp"
#include "wdec/spectrum.hpp"
#include "wdec/train.hpp"

namespace wdec {

// 1, then 2..22 step 2.
std::vector<std::size_t> default_sweep_sizes();
// 0, 0.2, ..., 1.0
std::vector<double> default_noise_fractions();

struct ExperimentSpec {
  std::vector<HeadKind> models{HeadKind::mlp};
  std::vector<FrontendMode> frontends{FrontendMode::hand_crafted};
  std::size_t n_runs = 5;
  std::vector<std::uint64_t> seeds;  // empty -> 0 .. n_runs-1
  std::size_t calibration_sessions = 6;
  std::vector<std::size_t> sizes = default_sweep_sizes();
  std::vector<double> fractions = default_noise_fractions();
  TrainConfig train;
  double extractor_dropout = 0.5;
  double head_dropout = 0.5;
  bool cfo_squeeze = false;
  std::optional<std::vector<double>> initial_frequencies;

  std::vector<std::uint64_t> resolved_seeds() const;
  void validate() const;
  nlohmann::json to_json() const;
  ModelConfig model_config(HeadKind head, FrontendMode frontend, std::uint64_t seed) const;
};

struct CellKey {
  std::string protocol;  // holdout | size | noise
  HeadKind model = HeadKind::mlp;
  FrontendMode frontend = FrontendMode::hand_crafted;
  double point = 0.0;  // training sessions (size) or label-noise fraction (noise)
  std::uint64_t seed = 0;

  std::string id() const;
};

struct CellResult {
  CellKey key;
  double test_cs = 0.0;
  double best_valid_loss = 0.0;
  double best_valid_cs = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
  std::string train_hash;
  std::string test_hash;
  std::vector<double> initial_frequencies;
  std::vector<double> final_frequencies;
  TrainingCurve curve;  // empty when loaded from a previous run
  bool resumed = false;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  static CellResult from_json(const nlohmann::json& j);
};

struct ExperimentResult {
  std::string protocol;
  HeadKind model = HeadKind::mlp;
  FrontendMode frontend = FrontendMode::hand_crafted;
  double point = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> test_cs;  // per run, aligned with seeds
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
  std::vector<CellResult> runs;

  static ExperimentResult aggregate(std::vector<CellResult> runs);
};

struct DifferencePoint {
  double point = 0.0;
  double mean_difference = 0.0;  // mean over matched seeds of (a - b)
  double smoothed = 0.0;         // centered moving average of width 3
};

struct DifferenceCurve {
  std::string label;  // e.g. "mlp:e2e-free-minus-hand-crafted"
  std::vector<DifferencePoint> points;
};

// Run-wise matched-seed differences a - b per point, then a width-3 moving
// average along the point axis (shrinking at the ends).
DifferenceCurve difference_curve(const std::vector<ExperimentResult>& a, const std::vector<ExperimentResult>& b,
                                 std::string label);
std::vector<double> moving_average(const std::vector<double>& values, std::size_t width = 3);

struct SweepResult {
  std::vector<ExperimentResult> results;  // grouped by (model, frontend, point)
  std::vector<DifferenceCurve> differences;
  std::size_t cells_run = 0;
  std::size_t cells_resumed = 0;
  bool interrupted = false;
};

// Hand-crafted pooled features depend only on the windows and the fixed
// wavelet frequencies, so they can be shared across cells, protocols and
// calls. Thread-safe.
class FeatureCacheStore {
public:
  std::shared_ptr<const PooledCache> get(const Dataset& dataset,
                                         const std::optional<std::vector<double>>& frequencies = std::nullopt);
  std::size_t size() const;

private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const PooledCache>> caches_;
};

struct RunnerOptions {
  std::filesystem::path out_dir;  // empty: keep results in memory only
  std::size_t jobs = 1;
  bool resume = true;
  std::size_t max_new_cells = 0;  // > 0: stop after this many fresh cells (simulated interruption)
  std::function<void(const CellResult&)> on_cell;
  std::shared_ptr<FeatureCacheStore> caches;  // null: a private store per call
};

// Train on the first `calibration_sessions` sessions (internal 90/10 split),
// test on every later session.
SweepResult run_holdout(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options = {});

// Train on the first s sessions for each size; test on sessions >= max(sizes).
SweepResult run_size_sweep(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options = {});

// Holdout split; the training partition's labels are shuffled at each fraction,
// the test partition is left untouched.
SweepResult run_noise_sweep(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options = {});

// Cells a protocol ("holdout", "size" or "noise") would run, in execution order.
std::vector<CellKey> plan_cells(const std::string& protocol, const ExperimentSpec& spec);

// summary.csv rows: protocol,model,frontend_mode,size_or_fraction,seed,test_cs
std::string summary_csv(const SweepResult& sweep);
// Per (model, frontend, point): mean and std of test CS.
std::string curve_csv(const SweepResult& sweep);
std::string difference_csv(const DifferenceCurve& curve);

struct FilterDrift {
  std::size_t index = 0;  // wavelet (cfo) or kernel index
  std::string part;       // re | im, empty for cfo wavelets
  double initial_hz = 0.0;
  double final_hz = 0.0;
  double delta_hz = 0.0;  // final - initial
};

struct FilterDriftReport {
  FilterMode mode = FilterMode::fixed;
  // cfo: one entry per wavelet from the stored frequencies; other modes: one
  // entry per kernel from spectral peaks.
  std::vector<FilterDrift> filters;
  std::vector<std::vector<double>> kernels_before;
  std::vector<std::vector<double>> kernels_after;
  std::vector<PowerSpectrum> spectra_before;
  std::vector<PowerSpectrum> spectra_after;

  double mean_delta() const;
  std::string delta_csv() const;
  std::string kernels_csv() const;
  std::string spectra_csv() const;
};

FilterDriftReport analyze_filter_drift(const Filterbank& before, const Filterbank& after);

}  // namespace wdec
