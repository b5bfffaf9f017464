#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "json.hpp"

#include "wdec/experiments.hpp"
#include "wdec/synth.hpp"

namespace wdec {

// Flat key = value text with [sections]; '#' starts a comment. Lists are
// comma separated; bands are written center:bandwidth.
//
//   [synth]       n_sessions, session_duration_s, bands, weight_scale,
//                 noise_exponent, noise_rms, snr, walk_step, seed
//   [train]       learning_rate, weight_decay, batch_size, max_epochs, patience,
//                 pretrain_freeze_epochs, valid_fraction, chronological_split, seed
//   [model]       extractor_dropout, head_dropout, cfo_squeeze, initial_frequencies
//   [experiment]  models, frontends, n_runs, seeds, calibration_sessions, sizes,
//                 fractions
//
// Every key is optional; unknown sections or keys are rejected.
struct RunConfig {
  SynthConfig synth;
  ExperimentSpec experiment;  // carries the training and model settings
  std::set<std::string> explicit_keys;  // "section.key" entries present in the file

  nlohmann::json to_json() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace wdec
