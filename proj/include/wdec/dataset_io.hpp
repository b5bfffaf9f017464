#pragma once

#include <filesystem>

#include "wdec/data.hpp"

namespace wdec {

inline constexpr char kDatasetMagic[4] = {'W', 'D', 'E', 'C'};
inline constexpr std::uint32_t kDatasetVersion = 1;

// Directory container: manifest.json plus one session_NNNN.bin per session.
// Each blob: "WDEC", u32 version, u32 channels, u64 samples, u64 steps, then
// little-endian float32 raw [channels x samples] followed by targets [steps x 3].
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace wdec
