#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "wdec/model.hpp"

namespace wdec {

inline constexpr char kCheckpointMagic[4] = {'W', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Directory layout:
//   manifest.json  architecture, frontend mode, seed, epoch, layer table
//                  (name, rows, cols, offset) in blob order
//   params.bin     "WDCK", u32 version, u64 count, float32 values
//   params64.bin   "WDCK", u32 version, u64 count, float64 values (exact copy)
// Loading prefers the 64-bit blob so restored models are bit-identical.
struct CheckpointMeta {
  ModelConfig config;
  std::size_t epoch = 0;
  nlohmann::json extra = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& dir, EndToEndModel& model, std::size_t epoch,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  std::unique_ptr<EndToEndModel> model;
  CheckpointMeta meta;
  nlohmann::json manifest;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

// Raw stored tensors by name, without rebuilding derived state.
std::map<std::string, std::vector<double>> read_checkpoint_tensors(const std::filesystem::path& dir,
                                                                   bool wide = true);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace wdec
