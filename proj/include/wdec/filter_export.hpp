#pragma once

#include <string>

#include "json.hpp"

#include "wdec/filterbank.hpp"

namespace wdec {

// One row per tap: filter_index (band 0..14), part (re|im), tap_index, value.
std::string filters_csv(const Filterbank& bank);

// Mode, frequencies and per-kernel spectral peaks of a bank; with `before`,
// also the peaks before training.
nlohmann::json filters_summary(const Filterbank& after, const Filterbank* before = nullptr);

}  // namespace wdec
