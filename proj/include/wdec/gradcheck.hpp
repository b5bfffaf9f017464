#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wdec/data.hpp"
#include "wdec/model.hpp"

namespace wdec {

struct GradCheckOptions {
  std::size_t samples_per_group = 6;
  double step = 1e-5;            // central-difference half step for ordinary parameters
  double frequency_step = 1e-3;  // Hz (or squeezed units / 140) for CFO centres
  double tolerance = 1e-3;
  // Denominator floor: gradients that vanish analytically (e.g. a shift
  // undone by a later batch norm) leave ~1e-11 of difference round-off.
  double abs_floor = 1e-7;
  std::uint64_t seed = 0;
  double corrupt_factor = 1.0;  // scales analytic gradients; != 1 is a negative control
};

struct GradCheckEntry {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  bool passed = true;
  double max_rel_error = 0.0;
  std::vector<GradCheckEntry> worst;  // worst entry per parameter group

  std::string summary() const;
};

// Compares analytic gradients against central differences on randomly chosen
// scalars of each group: |a - n| / max(abs_floor, |n|) <= tolerance.
// `loss` must recompute the objective from the current parameter values;
// `gradients` must zero and refill every group's .grad.
GradCheckReport finite_difference_check(std::span<Parameter* const> params, const std::function<double()>& loss,
                                        const std::function<void()>& gradients, const GradCheckOptions& options = {});

// Objective used for model checks: training-mode batch statistics, no dropout,
// cosine loss over the given windows.
double model_loss(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx);
void model_gradients(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx);

GradCheckReport check_model_gradients(EndToEndModel& model, const Dataset& dataset, std::span<const std::size_t> idx,
                                      std::span<Parameter* const> params, const GradCheckOptions& options = {});

}  // namespace wdec
