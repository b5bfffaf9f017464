// wdec: command-line front end for data generation, training, sweeps, filter
// inspection and evaluation.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "wdec/checkpoint.hpp"
#include "wdec/config_file.hpp"
#include "wdec/dataset_io.hpp"
#include "wdec/error.hpp"
#include "wdec/experiments.hpp"
#include "wdec/filter_export.hpp"
#include "wdec/hash.hpp"
#include "wdec/io.hpp"
#include "wdec/synth.hpp"
#include "wdec/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wdec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

fs::path output_root() {
  if (const char* env = std::getenv("WDEC_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return "wdec-out";
}

fs::path resolve_out(const std::string& flag, const std::string& command) {
  return flag.empty() ? output_root() / command : fs::path(flag);
}

// Single-line machine-parsable error report.
int report(const std::string& kind, const std::string& field, const std::string& message, int code) {
  json j{{"error", kind}, {"field", field}, {"message", message}, {"exit_code", code}};
  std::cerr << "wdec: " << j.dump() << std::endl;
  return code;
}

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

std::pair<std::size_t, std::size_t> parse_range(const std::string& text, std::size_t n_sessions) {
  if (text.empty()) return {0, n_sessions};
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const auto s = std::stoul(text);
      return {s, s + 1};
    }
    const std::size_t a = colon == 0 ? 0 : std::stoul(text.substr(0, colon));
    const std::size_t b = colon + 1 == text.size() ? n_sessions : std::stoul(text.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("sessions", "expected FIRST:LAST, got '" + text + "'");
  }
}

Dataset session_subset(const Dataset& d, const std::string& range) {
  const auto [a, b] = parse_range(range, d.sessions.size());
  if (a > b || b > d.sessions.size())
    throw ShapeError("sessions", "range " + range + " outside dataset of " + std::to_string(d.sessions.size()) +
                                     " sessions");
  return select_sessions(d, a, b);
}

// ------------------------------------------------------------------ gen-data

struct GenOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sessions;
  std::optional<double> duration;
  std::optional<double> snr;
};

int cmd_gen_data(const GenOptions& o) {
  RunConfig rc = config_from(o.config);
  if (o.seed) rc.synth.seed = *o.seed;
  if (o.sessions) rc.synth.n_sessions = *o.sessions;
  if (o.duration) rc.synth.session_duration_s = *o.duration;
  if (o.snr) rc.synth.snr = *o.snr;
  rc.synth.validate();
  const Dataset d = generate_synthetic(rc.synth);
  const fs::path out = resolve_out(o.out, "data");
  save_dataset(d, out);
  const Dataset check = load_dataset(out);
  const std::string hash = dataset_hash(check);
  if (hash != dataset_hash(d)) throw FormatError("dataset", "written dataset does not read back identically");
  std::cout << "sessions=" << d.sessions.size() << " windows=" << d.size() << " skipped=" << d.skipped_sessions
            << " seed=" << rc.synth.seed << " hash=" << hash << " out=" << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  std::string data;
  std::string model = "mlp";
  std::string frontend = "hand-crafted";
  std::string config;
  std::string out;
  std::string sessions;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> freeze_epochs;
  std::optional<double> learning_rate;
  std::optional<std::uint64_t> seed;
  bool cfo_squeeze = false;
  bool chronological = false;
};

int cmd_train(const TrainOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc = config_from(o.config);
  TrainConfig& tc = rc.experiment.train;
  if (o.max_epochs) tc.max_epochs = *o.max_epochs;
  if (o.patience) tc.patience = *o.patience;
  if (o.batch_size) tc.batch_size = *o.batch_size;
  if (o.freeze_epochs) tc.pretrain_freeze_epochs = *o.freeze_epochs;
  if (o.learning_rate) tc.learning_rate = *o.learning_rate;
  if (o.seed) tc.seed = *o.seed;
  if (o.chronological) tc.chronological_split = true;
  if (o.cfo_squeeze) rc.experiment.cfo_squeeze = true;
  tc.validate();

  const Dataset all = load_dataset(o.data);
  const Dataset data = session_subset(all, o.sessions);
  if (data.size() == 0) throw ShapeError("windows", "selected sessions contain no windows");

  const ModelConfig mc =
      rc.experiment.model_config(head_kind_from_string(o.model), frontend_mode_from_string(o.frontend), tc.seed);
  EndToEndModel model(mc);
  const fs::path out = resolve_out(o.out, "train");
  fs::create_directories(out);
  save_checkpoint(out / "initial", model, 0);

  const Split split = split_train_valid(data.size(), tc.valid_fraction, tc.seed, tc.chronological_split);
  PooledCache cache;
  if (!model.extractor().kernels_trainable()) cache = PooledCache(model.extractor(), data);
  const TrainingCurve curve = fit(model, data, split.train, split.valid, tc, cache.empty() ? nullptr : &cache);
  const EvalResult valid = evaluate(model, data, split.valid, cache.empty() ? nullptr : &cache, tc.batch_size);

  write_file_atomic(out / "curve.csv", curve.to_csv());
  save_checkpoint(out / "checkpoint", model, curve.best_epoch, {{"valid_cs", valid.mean_cs}});

  json manifest{{"command", "train"},
                {"dataset", fs::absolute(o.data).string()},
                {"dataset_hash", dataset_hash(data)},
                {"sessions", o.sessions.empty() ? "all" : o.sessions},
                {"config", rc.to_json()},
                {"model", model_config_to_json(mc)},
                {"train_windows", split.train.size()},
                {"valid_windows", split.valid.size()},
                {"best_epoch", curve.best_epoch},
                {"epochs_run", curve.epochs.size()},
                {"stopped_early", curve.stopped_early},
                {"clamp_events", curve.clamp_events},
                {"valid_cs", valid.mean_cs},
                {"valid_loss", valid.loss},
                {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_file_atomic(out / "run.json", manifest.dump(2));
  std::cout << "best_epoch=" << curve.best_epoch << " epochs=" << curve.epochs.size() << " valid_cs=" << valid.mean_cs
            << " out=" << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ sweep

struct SweepOptions {
  std::string protocol;
  std::string config;
  std::string data;
  std::string out;
  std::size_t jobs = 1;
  bool no_resume = false;
  std::size_t max_cells = 0;
  bool dry_run = false;
};

int cmd_sweep(const SweepOptions& o) {
  const RunConfig rc = config_from(o.config);
  rc.experiment.validate();
  if (o.dry_run) {
    const auto cells = plan_cells(o.protocol, rc.experiment);
    for (const auto& c : cells) std::cout << c.id() << "\n";
    std::cout << "cells=" << cells.size() << "\n";
    return 0;
  }
  Dataset data;
  if (o.data.empty()) {
    data = generate_synthetic(rc.synth);
  } else {
    data = load_dataset(o.data);
  }
  const fs::path out = resolve_out(o.out, "sweep-" + o.protocol);
  fs::create_directories(out);
  write_file_atomic(out / "config.json",
                    json{{"protocol", o.protocol}, {"config", rc.to_json()}, {"dataset_hash", dataset_hash(data)}}.dump(2));

  RunnerOptions ro;
  ro.out_dir = out;
  ro.jobs = o.jobs;
  ro.resume = !o.no_resume;
  ro.max_new_cells = o.max_cells;
  ro.on_cell = [](const CellResult& c) {
    std::cout << (c.resumed ? "skip " : "done ") << c.key.id() << " test_cs=" << c.test_cs << "\n" << std::flush;
  };
  SweepResult r;
  if (o.protocol == "size") {
    r = run_size_sweep(data, rc.experiment, ro);
  } else if (o.protocol == "noise") {
    r = run_noise_sweep(data, rc.experiment, ro);
  } else {
    r = run_holdout(data, rc.experiment, ro);
  }
  std::cout << "cells_run=" << r.cells_run << " cells_resumed=" << r.cells_resumed
            << " interrupted=" << (r.interrupted ? "true" : "false") << " out=" << out.string() << "\n";
  for (const auto& e : r.results)
    std::cout << to_string(e.model) << " " << to_string(e.frontend) << " " << e.point << " mean=" << e.mean
              << " std=" << e.std << "\n";
  return r.interrupted ? kExitRuntime : 0;
}

// ------------------------------------------------------------------ inspect-filters

int cmd_inspect(const std::string& before_dir, const std::string& after_dir, const std::string& out_flag) {
  const auto before = load_checkpoint(before_dir);
  const auto after = load_checkpoint(after_dir);
  if (before.meta.config.frontend != after.meta.config.frontend)
    throw ShapeError("frontend", "checkpoints use different frontend modes (" + to_string(before.meta.config.frontend) +
                                     " vs " + to_string(after.meta.config.frontend) + ")");
  const Filterbank& b = before.model->extractor().bank();
  const Filterbank& a = after.model->extractor().bank();
  const FilterDriftReport rep = analyze_filter_drift(b, a);
  const fs::path out = resolve_out(out_flag, "filters");
  fs::create_directories(out);
  write_file_atomic(out / "delta.csv", rep.delta_csv());
  write_file_atomic(out / "kernels.csv", rep.kernels_csv());
  write_file_atomic(out / "spectra.csv", rep.spectra_csv());
  write_file_atomic(out / "filters_before.csv", filters_csv(b));
  write_file_atomic(out / "filters_after.csv", filters_csv(a));
  json summary = filters_summary(a, &b);
  summary["before"] = fs::absolute(before_dir).string();
  summary["after"] = fs::absolute(after_dir).string();
  summary["mean_delta_hz"] = rep.mean_delta();
  summary["rows"] = rep.filters.size();
  write_file_atomic(out / "summary.json", summary.dump(2));
  std::cout << "mode=" << to_string(rep.mode) << " rows=" << rep.filters.size() << " mean_delta_hz=" << rep.mean_delta()
            << " out=" << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ eval

int cmd_eval(const std::string& ckpt, const std::string& data_dir, const std::string& sessions,
             const std::string& out_flag) {
  auto loaded = load_checkpoint(ckpt);
  const Dataset all = load_dataset(data_dir);
  const Dataset data = session_subset(all, sessions);
  if (data.size() == 0) throw ShapeError("windows", "evaluation partition is empty");
  const EvalResult r = evaluate(*loaded.model, data);

  std::map<int, std::pair<double, std::size_t>> per;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& p = per[data.sessions[data.windows[i].session]->id];
    p.first += r.window_cs[i];
    ++p.second;
  }
  json sess = json::array();
  for (const auto& [id, p] : per)
    sess.push_back({{"session", id}, {"windows", p.second}, {"mean_cs", p.first / static_cast<double>(p.second)}});
  json out{{"checkpoint", loaded.manifest},
           {"dataset_hash", dataset_hash(data)},
           {"sessions", sessions.empty() ? "all" : sessions},
           {"windows", data.size()},
           {"mean_cs", r.mean_cs},
           {"loss", r.loss},
           {"per_session", sess}};
  const fs::path path = out_flag.empty() ? output_root() / "eval" / "metrics.json" : fs::path(out_flag);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, out.dump(2));
  std::cout << "windows=" << data.size() << " mean_cs=" << r.mean_cs << " out=" << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-feature vs end-to-end filter decoding of multichannel trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wdec 1.0");

  GenOptions gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  g->add_option("-c,--config", gen.config, "Run configuration file ([synth] section)");
  g->add_option("-o,--out", gen.out, "Output directory (default $WDEC_OUTPUT_ROOT/data)");
  g->add_option("--seed", gen.seed, "Override synth.seed");
  g->add_option("--sessions", gen.sessions, "Override synth.n_sessions");
  g->add_option("--duration", gen.duration, "Override synth.session_duration_s");
  g->add_option("--snr", gen.snr, "Override synth.snr");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train one model on a dataset");
  t->add_option("-d,--data", tr.data, "Dataset directory")->required();
  t->add_option("-m,--model", tr.model, "mlp | cnn-lstm-mt")->capture_default_str();
  t->add_option("-f,--frontend", tr.frontend, "hand-crafted | e2e-free | e2e-cfo | e2e-random")->capture_default_str();
  t->add_option("-c,--config", tr.config, "Run configuration file ([train], [model])");
  t->add_option("-o,--out", tr.out, "Output directory (default $WDEC_OUTPUT_ROOT/train)");
  t->add_option("--sessions", tr.sessions, "Session range FIRST:LAST (default all)");
  t->add_option("--max-epochs", tr.max_epochs);
  t->add_option("--patience", tr.patience);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--freeze-epochs", tr.freeze_epochs);
  t->add_option("--lr", tr.learning_rate);
  t->add_option("--seed", tr.seed);
  t->add_flag("--cfo-squeeze", tr.cfo_squeeze, "Optimize CFO frequencies in the unit-range variable");
  t->add_flag("--chronological-split", tr.chronological, "Validate on the trailing windows instead of a random split");

  SweepOptions sw;
  auto* s = app.add_subcommand("sweep", "Run an experiment protocol");
  s->add_option("protocol", sw.protocol, "size | noise | holdout")
      ->required()
      ->check(CLI::IsMember({"size", "noise", "holdout"}));
  s->add_option("-c,--config", sw.config, "Run configuration file ([synth], [train], [model], [experiment])");
  s->add_option("-d,--data", sw.data, "Dataset directory (default: generate from [synth])");
  s->add_option("-o,--out", sw.out, "Results directory (default $WDEC_OUTPUT_ROOT/sweep-<protocol>)");
  s->add_option("-j,--jobs", sw.jobs, "Parallel cells")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_flag("--no-resume", sw.no_resume, "Recompute cells that already have results");
  s->add_option("--max-cells", sw.max_cells, "Stop after this many new cells (0 = all)");
  s->add_flag("--dry-run", sw.dry_run, "List the cells the protocol would run and exit");

  std::string before, after, inspect_out;
  auto* f = app.add_subcommand("inspect-filters", "Compare temporal filters of two checkpoints");
  f->add_option("before", before, "Checkpoint before training")->required();
  f->add_option("after", after, "Checkpoint after training")->required();
  f->add_option("-o,--out", inspect_out, "Output directory (default $WDEC_OUTPUT_ROOT/filters)");

  std::string ckpt, eval_data, eval_sessions, eval_out;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("-k,--checkpoint", ckpt, "Checkpoint directory")->required();
  e->add_option("-d,--data", eval_data, "Dataset directory")->required();
  e->add_option("--sessions", eval_sessions, "Session range FIRST:LAST (default all)");
  e->add_option("-o,--out", eval_out, "Metrics JSON path (default $WDEC_OUTPUT_ROOT/eval/metrics.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*s) return cmd_sweep(sw);
    if (*f) return cmd_inspect(before, after, inspect_out);
    if (*e) return cmd_eval(ckpt, eval_data, eval_sessions, eval_out);
  } catch (const ConfigError& err) {
    return report("config", err.field(), err.what(), kExitUsage);
  } catch (const FormatError& err) {
    return report("format", err.field(), err.what(), kExitRuntime);
  } catch (const ShapeError& err) {
    return report("shape", err.field(), err.what(), kExitRuntime);
  } catch (const NumericError& err) {
    return report("numeric", err.field(), err.what(), kExitRuntime);
  } catch (const std::exception& err) {
    return report("runtime", "", err.what(), kExitRuntime);
  }
  return kExitUsage;
}
