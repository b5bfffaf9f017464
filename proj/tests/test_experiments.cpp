#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"

#include "wdec/error.hpp"
#include "wdec/experiments.hpp"
#include "wdec/hash.hpp"
#include "wdec/io.hpp"

using namespace wdec;
namespace fs = std::filesystem;

namespace {

ExperimentSpec quick_spec() {
  ExperimentSpec s;
  s.n_runs = 2;
  s.calibration_sessions = 2;
  s.train.max_epochs = 2;
  s.train.batch_size = 32;
  return s;
}

CellResult cell(double point, std::uint64_t seed, double cs) {
  CellResult c;
  c.key = {"size", HeadKind::mlp, FrontendMode::hand_crafted, point, seed};
  c.test_cs = cs;
  return c;
}

}  // namespace

TEST_CASE("default grids") {
  auto sizes = default_sweep_sizes();
  CHECK(sizes.size() == 12);
  CHECK(sizes.front() == 1);
  CHECK(sizes[1] == 2);
  CHECK(sizes.back() == 22);
  auto fr = default_noise_fractions();
  CHECK(fr.size() == 6);
  CHECK(fr.back() == 1.0);

  ExperimentSpec s;
  CHECK(s.resolved_seeds() == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(s.calibration_sessions == 6);
  s.seeds = {3, 3};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("aggregate and differences") {
  auto r = ExperimentResult::aggregate({cell(1, 0, 0.2), cell(1, 1, 0.4), cell(1, 2, 0.6)});
  CHECK(r.mean == doctest::Approx(0.4));
  CHECK(r.std == doctest::Approx(std::sqrt(0.08 / 3.0)));
  CHECK(r.test_cs.size() == 3);

  std::vector<ExperimentResult> a{ExperimentResult::aggregate({cell(1, 0, 0.1), cell(1, 1, 0.3)}),
                                  ExperimentResult::aggregate({cell(2, 0, 0.5), cell(2, 1, 0.2)}),
                                  ExperimentResult::aggregate({cell(4, 0, 0.6), cell(4, 1, 0.9)})};
  auto self = difference_curve(a, a, "self");
  for (const auto& p : self.points) {
    CHECK(p.mean_difference == 0.0);
    CHECK(p.smoothed == 0.0);
  }

  std::vector<ExperimentResult> b{ExperimentResult::aggregate({cell(1, 1, 0.0), cell(1, 0, 0.0)}),
                                  ExperimentResult::aggregate({cell(2, 0, 0.0), cell(2, 1, 0.0)}),
                                  ExperimentResult::aggregate({cell(4, 0, 0.0), cell(4, 1, 0.0)})};
  auto d = difference_curve(a, b, "d");
  CHECK(d.points[0].mean_difference == doctest::Approx(0.2));
  CHECK(d.points[1].mean_difference == doctest::Approx(0.35));
  CHECK(d.points[2].mean_difference == doctest::Approx(0.75));
  CHECK(d.points[0].smoothed == doctest::Approx((0.2 + 0.35) / 2));
  CHECK(d.points[1].smoothed == doctest::Approx((0.2 + 0.35 + 0.75) / 3));

  CHECK(moving_average({1, 2, 3, 4}) == std::vector<double>{1.5, 2, 3, 3.5});
}

TEST_CASE("protocol preconditions") {
  auto d = generate_synthetic(testutil::tiny_config(2, 1.5, 1));
  auto spec = quick_spec();
  CHECK_THROWS_AS(run_holdout(d, spec), ShapeError);
  spec.sizes = {1, 2};
  CHECK_THROWS_AS(run_size_sweep(d, spec), ShapeError);
}

TEST_CASE("noise fraction zero equals holdout") {
  auto d = generate_synthetic(testutil::tiny_config(3, 3.0, 2));
  auto spec = quick_spec();
  spec.fractions = {0.0, 1.0};
  auto h = run_holdout(d, spec);
  auto n = run_noise_sweep(d, spec);
  REQUIRE(h.results.size() == 1);
  REQUIRE(n.results.size() == 2);
  CHECK(n.results[0].point == 0.0);
  CHECK(n.results[0].test_cs == h.results[0].test_cs);
  // test partition is the same at every noise level
  CHECK(n.results[0].runs[0].test_hash == n.results[1].runs[0].test_hash);
  CHECK(n.results[0].runs[0].train_hash == n.results[1].runs[1].train_hash);
}

TEST_CASE("untrained model sits at chance") {
  auto cfg = testutil::tiny_config(1000, 1.2, 3);
  auto d = generate_synthetic(cfg);
  REQUIRE(d.size() >= 1000);
  for (std::uint64_t seed : {0U, 1U}) {
    ModelConfig mc;
    mc.seed = seed;
    EndToEndModel model(mc);
    auto r = evaluate(model, d);
    CHECK(std::abs(r.mean_cs) < 0.05);
  }
}

TEST_CASE("size sweep") {
  auto cfg = testutil::tiny_config(10, 10.0, 4);
  auto d = generate_synthetic(cfg);
  ExperimentSpec spec;
  spec.sizes = {1, 8};
  spec.train.max_epochs = 15;
  spec.train.patience = 5;
  auto s = run_size_sweep(d, spec);
  REQUIRE(s.results.size() == 2);
  CHECK(s.results[0].point == 1.0);
  CHECK(s.results[1].point == 8.0);
  MESSAGE("size 1: " << s.results[0].mean << ", size 8: " << s.results[1].mean);
  CHECK(s.results[1].mean >= s.results[0].mean - 0.02);
  CHECK(s.results[0].runs[0].test_hash == s.results[1].runs[0].test_hash);
  CHECK(s.results[0].runs[0].train_windows < s.results[1].runs[0].train_windows);
}

TEST_CASE("difference curves across frontends") {
  auto d = generate_synthetic(testutil::tiny_config(3, 3.0, 5));
  auto spec = quick_spec();
  spec.n_runs = 1;
  spec.sizes = {1, 2};
  spec.frontends = {FrontendMode::hand_crafted, FrontendMode::e2e_free, FrontendMode::e2e_cfo};
  spec.train.max_epochs = 1;
  auto s = run_size_sweep(d, spec);
  CHECK(s.results.size() == 6);
  REQUIRE(s.differences.size() == 3);
  CHECK(s.differences[0].label == "mlp:e2e-free-minus-hand-crafted");
  CHECK(s.differences[2].label == "mlp:e2e-cfo-minus-e2e-free");
}

TEST_CASE("cells persist and resume") {
  auto d = generate_synthetic(testutil::tiny_config(3, 2.0, 6));
  auto spec = quick_spec();
  spec.n_runs = 3;
  auto dir = testutil::scratch("resume");
  RunnerOptions opt;
  opt.out_dir = dir;
  opt.max_new_cells = 2;
  auto first = run_holdout(d, spec, opt);
  CHECK(first.interrupted);
  CHECK(first.cells_run == 2);

  opt.max_new_cells = 0;
  auto second = run_holdout(d, spec, opt);
  CHECK_FALSE(second.interrupted);
  CHECK(second.cells_resumed == 2);
  CHECK(second.cells_run == 1);

  RunnerOptions fresh;
  fresh.resume = false;
  auto third = run_holdout(d, spec, fresh);
  CHECK(third.results[0].test_cs == second.results[0].test_cs);

  auto summary = read_file(dir / "summary.csv");
  CHECK(summary.rfind("protocol,model,frontend_mode,size_or_fraction,seed,test_cs\n", 0) == 0);
  CHECK(fs::exists(dir / "holdout_curve.csv"));
  std::size_t cells = 0;
  for (const auto& e : fs::directory_iterator(dir / "cells")) {
    CHECK(fs::exists(e.path() / "manifest.json"));
    CHECK(fs::exists(e.path() / "curve.csv"));
    ++cells;
  }
  CHECK(cells == 3);

  // a changed spec must not reuse stale cells
  spec.train.max_epochs = 1;
  opt.max_new_cells = 0;
  auto changed = run_holdout(d, spec, opt);
  CHECK(changed.cells_resumed == 0);
}

TEST_CASE("filter drift reports") {
  SUBCASE("identical banks") {
    Filterbank a(FilterMode::cfo, 586.0, 0);
    auto rep = analyze_filter_drift(a, a);
    CHECK(rep.filters.size() == 15);
    for (const auto& f : rep.filters) CHECK(f.delta_hz == 0.0);
    CHECK(rep.mean_delta() == 0.0);
  }
  SUBCASE("moved cfo frequencies") {
    Filterbank a(FilterMode::cfo, 586.0, 0);
    Filterbank b(FilterMode::cfo, 586.0, 0);
    auto f = b.frequencies();
    for (auto& v : f) v -= 2.0;
    b.set_frequencies(f);
    auto rep = analyze_filter_drift(a, b);
    CHECK(rep.mean_delta() == doctest::Approx(-2.0));
    CHECK(rep.delta_csv().find('\n') != std::string::npos);
  }
  SUBCASE("random mode peaks") {
    auto a = build_filterbank(FilterMode::random, 586.0, 0);
    auto rep = analyze_filter_drift(a, a);
    CHECK(rep.filters.size() == 30);
    for (const auto& f : rep.filters) {
      CHECK(f.final_hz >= 0.0);
      CHECK(f.final_hz <= 293.0);
    }
    CHECK(rep.kernels_csv().size() > 0);
    CHECK(rep.spectra_csv().size() > 0);
  }
  SUBCASE("mode mismatch") {
    auto a = build_filterbank(FilterMode::free, 586.0, 0);
    auto b = build_filterbank(FilterMode::cfo, 586.0, 0);
    CHECK_THROWS_AS(analyze_filter_drift(a, b), ShapeError);
  }
}
