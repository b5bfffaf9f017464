#include "wdec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "wdec/error.hpp"
#include "wdec/hash.hpp"
#include "wdec/io.hpp"

namespace wdec {

namespace fs = std::filesystem;

std::vector<std::size_t> default_sweep_sizes() {
  std::vector<std::size_t> s{1};
  for (std::size_t k = 2; k <= 22; k += 2) s.push_back(k);
  return s;
}

std::vector<double> default_noise_fractions() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<std::uint64_t> ExperimentSpec::resolved_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> s(n_runs);
  std::iota(s.begin(), s.end(), std::uint64_t{0});
  return s;
}

void ExperimentSpec::validate() const {
  if (models.empty()) throw ConfigError("models", "at least one model is required");
  if (frontends.empty()) throw ConfigError("frontends", "at least one frontend mode is required");
  if (n_runs == 0 && seeds.empty()) throw ConfigError("n_runs", "must be at least 1");
  const auto s = resolved_seeds();
  if (std::set<std::uint64_t>(s.begin(), s.end()).size() != s.size()) throw ConfigError("seeds", "seeds must be distinct");
  if (calibration_sessions == 0) throw ConfigError("calibration_sessions", "must be positive");
  if (sizes.empty()) throw ConfigError("sizes", "at least one size is required");
  for (auto v : sizes)
    if (v == 0) throw ConfigError("sizes", "sizes must be positive");
  for (double f : fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("fractions", "fractions must lie in [0, 1]");
  if (!(extractor_dropout >= 0.0 && extractor_dropout < 1.0)) throw ConfigError("extractor_dropout", "must lie in [0, 1)");
  if (!(head_dropout >= 0.0 && head_dropout < 1.0)) throw ConfigError("head_dropout", "must lie in [0, 1)");
  train.validate();
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j;
  j["models"] = nlohmann::json::array();
  for (auto m : models) j["models"].push_back(to_string(m));
  j["frontends"] = nlohmann::json::array();
  for (auto f : frontends) j["frontends"].push_back(to_string(f));
  j["seeds"] = resolved_seeds();
  j["calibration_sessions"] = calibration_sessions;
  j["sizes"] = sizes;
  j["fractions"] = fractions;
  j["train"] = train.to_json();
  j["extractor_dropout"] = extractor_dropout;
  j["head_dropout"] = head_dropout;
  j["cfo_squeeze"] = cfo_squeeze;
  if (initial_frequencies) j["initial_frequencies"] = *initial_frequencies;
  return j;
}

ModelConfig ExperimentSpec::model_config(HeadKind head, FrontendMode frontend, std::uint64_t seed) const {
  ModelConfig c;
  c.head = head;
  c.frontend = frontend;
  c.seed = seed;
  c.extractor_dropout = extractor_dropout;
  c.head_dropout = head_dropout;
  c.cfo_squeeze = cfo_squeeze;
  c.initial_frequencies = initial_frequencies;
  return c;
}

std::string CellKey::id() const {
  std::ostringstream os;
  os << protocol << '_' << to_string(model) << '_' << to_string(frontend) << '_';
  if (protocol == "noise") {
    os << "f" << std::llround(point * 1000.0);
  } else {
    os << "n" << std::llround(point);
  }
  os << "_s" << seed;
  return os.str();
}

nlohmann::json CellResult::to_json() const {
  return {{"protocol", key.protocol},
          {"model", to_string(key.model)},
          {"frontend_mode", to_string(key.frontend)},
          {"point", key.point},
          {"seed", key.seed},
          {"test_cs", test_cs},
          {"best_valid_loss", best_valid_loss},
          {"best_valid_cs", best_valid_cs},
          {"best_epoch", best_epoch},
          {"epochs_run", epochs_run},
          {"train_windows", train_windows},
          {"test_windows", test_windows},
          {"train_hash", train_hash},
          {"test_hash", test_hash},
          {"initial_frequencies", initial_frequencies},
          {"final_frequencies", final_frequencies},
          {"clamp_events", curve.clamp_events},
          {"wall_seconds", wall_seconds}};
}

CellResult CellResult::from_json(const nlohmann::json& j) {
  CellResult r;
  try {
    r.key.protocol = j.at("protocol").get<std::string>();
    r.key.model = head_kind_from_string(j.at("model").get<std::string>());
    r.key.frontend = frontend_mode_from_string(j.at("frontend_mode").get<std::string>());
    r.key.point = j.at("point").get<double>();
    r.key.seed = j.at("seed").get<std::uint64_t>();
    r.test_cs = j.at("test_cs").get<double>();
    r.best_valid_loss = j.at("best_valid_loss").get<double>();
    r.best_valid_cs = j.at("best_valid_cs").get<double>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.train_windows = j.at("train_windows").get<std::size_t>();
    r.test_windows = j.at("test_windows").get<std::size_t>();
    r.train_hash = j.at("train_hash").get<std::string>();
    r.test_hash = j.at("test_hash").get<std::string>();
    r.initial_frequencies = j.at("initial_frequencies").get<std::vector<double>>();
    r.final_frequencies = j.at("final_frequencies").get<std::vector<double>>();
    r.wall_seconds = j.value("wall_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("cell", e.what());
  }
  return r;
}

ExperimentResult ExperimentResult::aggregate(std::vector<CellResult> runs) {
  if (runs.empty()) throw ShapeError("runs", "cannot aggregate zero runs");
  ExperimentResult r;
  r.protocol = runs.front().key.protocol;
  r.model = runs.front().key.model;
  r.frontend = runs.front().key.frontend;
  r.point = runs.front().key.point;
  for (const auto& c : runs) {
    r.seeds.push_back(c.key.seed);
    r.test_cs.push_back(c.test_cs);
  }
  const double n = static_cast<double>(r.test_cs.size());
  r.mean = std::accumulate(r.test_cs.begin(), r.test_cs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : r.test_cs) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  r.runs = std::move(runs);
  return r;
}

std::vector<double> moving_average(const std::vector<double>& values, std::size_t width) {
  if (width == 0) throw ConfigError("width", "moving-average width must be positive");
  const std::size_t half = width / 2;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size(), i + width - half);
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += values[k];
    out[i] = s / static_cast<double>(hi - lo);
  }
  return out;
}

DifferenceCurve difference_curve(const std::vector<ExperimentResult>& a, const std::vector<ExperimentResult>& b,
                                 std::string label) {
  if (a.size() != b.size()) throw ShapeError("difference", "curves have different lengths");
  DifferenceCurve curve{std::move(label), {}};
  std::vector<double> raw;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].point != b[i].point) throw ShapeError("difference", "curves sampled at different points");
    std::map<std::uint64_t, double> by_seed;
    for (std::size_t r = 0; r < b[i].seeds.size(); ++r) by_seed[b[i].seeds[r]] = b[i].test_cs[r];
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < a[i].seeds.size(); ++r) {
      const auto it = by_seed.find(a[i].seeds[r]);
      if (it == by_seed.end()) continue;
      sum += a[i].test_cs[r] - it->second;
      ++n;
    }
    if (n == 0) throw ShapeError("difference", "no matched seeds");
    raw.push_back(sum / static_cast<double>(n));
    curve.points.push_back({a[i].point, raw.back(), 0.0});
  }
  const auto smooth = moving_average(raw, 3);
  for (std::size_t i = 0; i < smooth.size(); ++i) curve.points[i].smoothed = smooth[i];
  return curve;
}

namespace {

struct CellJob {
  CellKey key;
  const Dataset* train = nullptr;
  const PooledCache* train_cache = nullptr;
  std::string train_hash;
};

struct SweepContext {
  const ExperimentSpec* spec = nullptr;
  const Dataset* test = nullptr;
  const PooledCache* test_cache = nullptr;
  std::string test_hash;
  RunnerOptions options;
};

std::string fingerprint(const SweepContext& ctx, const CellJob& job) {
  Sha256 h;
  h.update(ctx.spec->to_json().dump());
  h.update(job.key.id());
  h.update(job.train_hash);
  h.update(ctx.test_hash);
  return h.hex();
}

CellResult run_cell(const SweepContext& ctx, const CellJob& job) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentSpec& spec = *ctx.spec;
  Dataset train_set;
  const Dataset* train = job.train;
  if (job.key.protocol == "noise") {
    train_set = perturb_targets(*job.train, job.key.point, derive_seed(job.key.seed, {0x6e6f697365ULL}));
    train = &train_set;
  }

  EndToEndModel model(spec.model_config(job.key.model, job.key.frontend, job.key.seed));
  TrainConfig cfg = spec.train;
  cfg.seed = job.key.seed;

  CellResult r;
  r.key = job.key;
  r.initial_frequencies = model.extractor().bank().frequencies();
  r.curve = wdec::train(model, *train, cfg, job.train_cache);
  const EvalResult test = evaluate(model, *ctx.test, {}, ctx.test_cache, cfg.batch_size);

  r.test_cs = test.mean_cs;
  r.best_epoch = r.curve.best_epoch;
  r.epochs_run = r.curve.epochs.size();
  for (const auto& e : r.curve.epochs)
    if (e.epoch == r.best_epoch) {
      r.best_valid_loss = e.valid_loss;
      r.best_valid_cs = e.valid_cs;
    }
  r.train_windows = train->size();
  r.test_windows = ctx.test->size();
  r.train_hash = job.train_hash;
  r.test_hash = ctx.test_hash;
  r.final_frequencies = model.extractor().bank().frequencies();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::optional<CellResult> load_finished(const SweepContext& ctx, const CellJob& job) {
  if (ctx.options.out_dir.empty() || !ctx.options.resume) return std::nullopt;
  const fs::path manifest = ctx.options.out_dir / "cells" / job.key.id() / "manifest.json";
  if (!fs::exists(manifest)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(manifest));
    if (j.value("fingerprint", "") != fingerprint(ctx, job)) return std::nullopt;
    CellResult r = CellResult::from_json(j.at("result"));
    r.resumed = true;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable leftovers are recomputed
  }
}

void store_cell(const SweepContext& ctx, const CellJob& job, const CellResult& r) {
  if (ctx.options.out_dir.empty()) return;
  const fs::path dir = ctx.options.out_dir / "cells" / job.key.id();
  fs::create_directories(dir);
  write_file_atomic(dir / "curve.csv", r.curve.to_csv());
  nlohmann::json m{{"fingerprint", fingerprint(ctx, job)},
                   {"spec", ctx.spec->to_json()},
                   {"result", r.to_json()},
                   {"complete", true}};
  write_file_atomic(dir / "manifest.json", m.dump(2));
}

SweepResult run_cells(const SweepContext& ctx, const std::vector<CellJob>& jobs) {
  std::vector<std::optional<CellResult>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> fresh{0};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> resumed{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        if (auto done = load_finished(ctx, jobs[i])) {
          results[i] = std::move(done);
          ++resumed;
        } else {
          if (ctx.options.max_new_cells > 0 && fresh.fetch_add(1) >= ctx.options.max_new_cells) {
            stop = true;
            return;
          }
          CellResult r = run_cell(ctx, jobs[i]);
          store_cell(ctx, jobs[i], r);
          results[i] = std::move(r);
        }
        if (ctx.options.on_cell) {
          std::lock_guard lock(mu);
          ctx.options.on_cell(*results[i]);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(ctx.options.jobs, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  out.cells_resumed = resumed.load();
  // Group completed cells by (model, frontend, point) in job order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<CellResult>> groups;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!results[i]) {
      out.interrupted = true;
      continue;
    }
    if (!results[i]->resumed) ++out.cells_run;
    const auto& k = jobs[i].key;
    std::ostringstream g;
    g << to_string(k.model) << '|' << to_string(k.frontend) << '|' << k.point;
    if (!groups.contains(g.str())) order.push_back(g.str());
    groups[g.str()].push_back(*results[i]);
  }
  for (const auto& g : order) out.results.push_back(ExperimentResult::aggregate(groups[g]));
  return out;
}

std::vector<ExperimentResult> series(const SweepResult& s, HeadKind model, FrontendMode frontend) {
  std::vector<ExperimentResult> out;
  for (const auto& r : s.results)
    if (r.model == model && r.frontend == frontend) out.push_back(r);
  return out;
}

void add_differences(SweepResult& s, const ExperimentSpec& spec) {
  if (s.interrupted) return;
  auto has = [&](FrontendMode m) { return std::find(spec.frontends.begin(), spec.frontends.end(), m) != spec.frontends.end(); };
  for (auto model : spec.models) {
    const std::string prefix = to_string(model) + ":";
    if (has(FrontendMode::hand_crafted))
      for (auto f : spec.frontends)
        if (f != FrontendMode::hand_crafted)
          s.differences.push_back(difference_curve(series(s, model, f), series(s, model, FrontendMode::hand_crafted),
                                                   prefix + to_string(f) + "-minus-hand-crafted"));
    if (has(FrontendMode::e2e_cfo) && has(FrontendMode::e2e_free))
      s.differences.push_back(difference_curve(series(s, model, FrontendMode::e2e_cfo),
                                               series(s, model, FrontendMode::e2e_free), prefix + "e2e-cfo-minus-e2e-free"));
  }
}

void write_outputs(const SweepResult& s, const RunnerOptions& options, const std::string& protocol) {
  if (options.out_dir.empty()) return;
  fs::create_directories(options.out_dir);
  write_file_atomic(options.out_dir / "summary.csv", summary_csv(s));
  write_file_atomic(options.out_dir / (protocol + "_curve.csv"), curve_csv(s));
  for (const auto& d : s.differences) {
    std::string name = d.label;
    std::replace(name.begin(), name.end(), ':', '_');
    write_file_atomic(options.out_dir / ("difference_" + name + ".csv"), difference_csv(d));
  }
}

// Hand-crafted features do not depend on the seed or the labels, so pooled
// rows are computed once per partition and shared by every cell.
bool needs_cache(const ExperimentSpec& spec) {
  return std::find(spec.frontends.begin(), spec.frontends.end(), FrontendMode::hand_crafted) != spec.frontends.end();
}

std::vector<CellJob> grid(const ExperimentSpec& spec, const std::string& protocol, const std::vector<double>& points,
                          const std::function<CellJob(double)>& base) {
  std::vector<CellJob> jobs;
  for (auto model : spec.models)
    for (auto frontend : spec.frontends)
      for (double p : points)
        for (auto seed : spec.resolved_seeds()) {
          CellJob j = base(p);
          j.key = {protocol, model, frontend, p, seed};
          if (frontend != FrontendMode::hand_crafted) j.train_cache = nullptr;
          jobs.push_back(j);
        }
  return jobs;
}

SweepResult holdout_like(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options,
                         const std::string& protocol, const std::vector<double>& points) {
  spec.validate();
  if (dataset.sessions.size() <= spec.calibration_sessions)
    throw ShapeError("sessions", "holdout needs more than " + std::to_string(spec.calibration_sessions) +
                                     " sessions, dataset has " + std::to_string(dataset.sessions.size()));
  const Dataset train = select_sessions(dataset, 0, spec.calibration_sessions);
  const Dataset test = select_sessions(dataset, spec.calibration_sessions, dataset.sessions.size());
  if (test.size() == 0) throw ShapeError("windows", "test partition has no windows");
  auto store = options.caches ? options.caches : std::make_shared<FeatureCacheStore>();
  std::shared_ptr<const PooledCache> train_cache, test_cache;
  if (needs_cache(spec)) {
    train_cache = store->get(train, spec.initial_frequencies);
    test_cache = store->get(test, spec.initial_frequencies);
  }
  SweepContext ctx{&spec, &test, test_cache.get(), dataset_hash(test), options};
  const std::string train_hash = dataset_hash(train);
  const auto jobs = grid(spec, protocol, points, [&](double) {
    return CellJob{{}, &train, train_cache.get(), train_hash};
  });
  SweepResult s = run_cells(ctx, jobs);
  write_outputs(s, options, protocol);
  return s;
}

}  // namespace

SweepResult run_holdout(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options) {
  return holdout_like(dataset, spec, options, "holdout", {static_cast<double>(spec.calibration_sessions)});
}

SweepResult run_noise_sweep(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options) {
  return holdout_like(dataset, spec, options, "noise", spec.fractions);
}

SweepResult run_size_sweep(const Dataset& dataset, const ExperimentSpec& spec, const RunnerOptions& options) {
  spec.validate();
  const std::size_t max_size = *std::max_element(spec.sizes.begin(), spec.sizes.end());
  if (dataset.sessions.size() < max_size + 1)
    throw ShapeError("sessions", "size sweep up to " + std::to_string(max_size) + " sessions needs at least " +
                                     std::to_string(max_size + 1) + ", dataset has " +
                                     std::to_string(dataset.sessions.size()));
  const Dataset test = select_sessions(dataset, max_size, dataset.sessions.size());
  if (test.size() == 0) throw ShapeError("windows", "test partition has no windows");

  const bool cache = needs_cache(spec);
  auto store = options.caches ? options.caches : std::make_shared<FeatureCacheStore>();
  std::shared_ptr<const PooledCache> pool_cache, test_cache;
  if (cache) {
    pool_cache = store->get(select_sessions(dataset, 0, max_size), spec.initial_frequencies);
    test_cache = store->get(test, spec.initial_frequencies);
  }
  // Training sets are leading-session prefixes, so their windows are a prefix
  // of the pooled cache.
  std::deque<Dataset> trains;
  std::deque<PooledCache> caches;
  std::map<std::size_t, std::pair<const Dataset*, const PooledCache*>> by_size;
  std::map<std::size_t, std::string> hashes;
  for (auto s : spec.sizes) {
    if (by_size.contains(s)) continue;
    trains.push_back(select_sessions(dataset, 0, s));
    const PooledCache* c = nullptr;
    if (cache) {
      caches.push_back(pool_cache->prefix(trains.back().size()));
      c = &caches.back();
    }
    by_size[s] = {&trains.back(), c};
    hashes[s] = dataset_hash(trains.back());
  }

  SweepContext ctx{&spec, &test, test_cache.get(), dataset_hash(test), options};
  std::vector<double> points(spec.sizes.begin(), spec.sizes.end());
  const auto jobs = grid(spec, "size", points, [&](double p) {
    const auto s = static_cast<std::size_t>(p);
    return CellJob{{}, by_size[s].first, by_size[s].second, hashes[s]};
  });
  SweepResult result = run_cells(ctx, jobs);
  add_differences(result, spec);
  write_outputs(result, options, "size");
  return result;
}

std::shared_ptr<const PooledCache> FeatureCacheStore::get(const Dataset& dataset,
                                                           const std::optional<std::vector<double>>& frequencies) {
  std::string key = dataset_hash(dataset);
  if (frequencies)
    for (double f : *frequencies) key += ":" + std::to_string(f);
  std::lock_guard lock(mu_);
  if (auto it = caches_.find(key); it != caches_.end()) return it->second;
  FeatureExtractor fx(Filterbank(FilterMode::fixed, kSampleRate, 0, frequencies), 0.0);
  auto cache = std::make_shared<const PooledCache>(fx, dataset);
  caches_[key] = cache;
  return cache;
}

std::size_t FeatureCacheStore::size() const {
  std::lock_guard lock(mu_);
  return caches_.size();
}

std::vector<CellKey> plan_cells(const std::string& protocol, const ExperimentSpec& spec) {
  spec.validate();
  std::vector<double> points;
  if (protocol == "holdout") {
    points = {static_cast<double>(spec.calibration_sessions)};
  } else if (protocol == "size") {
    for (auto s : spec.sizes) points.push_back(static_cast<double>(s));
  } else if (protocol == "noise") {
    points = spec.fractions;
  } else {
    throw ConfigError("protocol", "unknown protocol '" + protocol + "'");
  }
  std::vector<CellKey> out;
  for (auto model : spec.models)
    for (auto frontend : spec.frontends)
      for (double p : points)
        for (auto seed : spec.resolved_seeds()) out.push_back({protocol, model, frontend, p, seed});
  return out;
}

std::string summary_csv(const SweepResult& sweep) {
  std::ostringstream os;
  os.precision(17);
  os << "protocol,model,frontend_mode,size_or_fraction,seed,test_cs\n";
  for (const auto& r : sweep.results)
    for (const auto& c : r.runs)
      os << c.key.protocol << ',' << to_string(c.key.model) << ',' << to_string(c.key.frontend) << ',' << c.key.point
         << ',' << c.key.seed << ',' << c.test_cs << '\n';
  return os.str();
}

std::string curve_csv(const SweepResult& sweep) {
  std::ostringstream os;
  os.precision(17);
  os << "model,frontend_mode,size_or_fraction,runs,mean_test_cs,std_test_cs\n";
  for (const auto& r : sweep.results)
    os << to_string(r.model) << ',' << to_string(r.frontend) << ',' << r.point << ',' << r.test_cs.size() << ','
       << r.mean << ',' << r.std << '\n';
  return os.str();
}

std::string difference_csv(const DifferenceCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "size_or_fraction,mean_difference,moving_average_3\n";
  for (const auto& p : curve.points) os << p.point << ',' << p.mean_difference << ',' << p.smoothed << '\n';
  return os.str();
}

// ---------------------------------------------------------------- filter drift

double FilterDriftReport::mean_delta() const {
  if (filters.empty()) return 0.0;
  double s = 0.0;
  for (const auto& f : filters) s += f.delta_hz;
  return s / static_cast<double>(filters.size());
}

std::string FilterDriftReport::delta_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "index,part,initial_hz,final_hz,delta_hz\n";
  for (const auto& f : filters)
    os << f.index << ',' << f.part << ',' << f.initial_hz << ',' << f.final_hz << ',' << f.delta_hz << '\n';
  return os.str();
}

std::string FilterDriftReport::kernels_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "stage,filter_index,part,tap_index,value\n";
  auto dump = [&](const char* stage, const std::vector<std::vector<double>>& ks) {
    for (std::size_t k = 0; k < ks.size(); ++k)
      for (std::size_t n = 0; n < ks[k].size(); ++n)
        os << stage << ',' << k % kBands << ',' << (k < kBands ? "re" : "im") << ',' << n << ',' << ks[k][n] << '\n';
  };
  dump("before", kernels_before);
  dump("after", kernels_after);
  return os.str();
}

std::string FilterDriftReport::spectra_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "stage,kernel_index,part,frequency_hz,power\n";
  auto dump = [&](const char* stage, const std::vector<PowerSpectrum>& ss) {
    for (std::size_t k = 0; k < ss.size(); ++k)
      for (std::size_t b = 0; b < ss[k].power.size(); ++b)
        os << stage << ',' << k % kBands << ',' << (k < kBands ? "re" : "im") << ',' << ss[k].frequencies_hz[b] << ','
           << ss[k].power[b] << '\n';
  };
  dump("before", spectra_before);
  dump("after", spectra_after);
  return os.str();
}

FilterDriftReport analyze_filter_drift(const Filterbank& before, const Filterbank& after) {
  if (before.mode() != after.mode())
    throw ShapeError("frontend", "filter drift needs matching modes, got " + to_string(before.mode()) + " and " +
                                      to_string(after.mode()));
  FilterDriftReport rep;
  rep.mode = after.mode();
  for (std::size_t k = 0; k < kKernels; ++k) {
    const auto row = [k](const Filterbank& b) {
      return std::vector<double>(b.kernels().value.begin() + static_cast<std::ptrdiff_t>(k * kMorletSupport),
                                 b.kernels().value.begin() + static_cast<std::ptrdiff_t>((k + 1) * kMorletSupport));
    };
    rep.kernels_before.push_back(row(before));
    rep.kernels_after.push_back(row(after));
    rep.spectra_before.push_back(power_spectrum(rep.kernels_before.back(), before.sample_rate()));
    rep.spectra_after.push_back(power_spectrum(rep.kernels_after.back(), after.sample_rate()));
  }
  if (rep.mode == FilterMode::cfo) {
    const auto f0 = before.frequencies();
    const auto f1 = after.frequencies();
    for (std::size_t j = 0; j < kBands; ++j) rep.filters.push_back({j, "", f0[j], f1[j], f1[j] - f0[j]});
  } else {
    for (std::size_t k = 0; k < kKernels; ++k) {
      const double a = rep.spectra_before[k].peak_hz;
      const double b = rep.spectra_after[k].peak_hz;
      rep.filters.push_back({k, k < kBands ? "re" : "im", a, b, b - a});
    }
  }
  return rep;
}

}  // namespace wdec
