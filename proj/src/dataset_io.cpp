#include "wdec/dataset_io.hpp"

#include <cstdio>

#include "json.hpp"

#include "wdec/error.hpp"
#include "wdec/hash.hpp"
#include "wdec/io.hpp"

namespace wdec {

namespace fs = std::filesystem;

namespace {

std::string blob_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "session_%04zu.bin", i);
  return buf;
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "WDEC";
  manifest["version"] = kDatasetVersion;
  manifest["n_sessions"] = dataset.sessions.size();
  manifest["seed"] = dataset.seed;
  manifest["config"] = dataset.config;
  manifest["sessions"] = nlohmann::json::array();

  for (std::size_t i = 0; i < dataset.sessions.size(); ++i) {
    const Session& s = *dataset.sessions[i];
    ByteWriter w;
    w.put_bytes(std::string_view(kDatasetMagic, 4));
    w.put_u32(kDatasetVersion);
    w.put_u32(static_cast<std::uint32_t>(kChannels));
    w.put_u64(s.n_samples);
    w.put_u64(s.n_steps());
    w.put_f32s(s.raw);
    w.put_f32s(s.targets);
    write_file_atomic(dir / blob_name(i), w.str());
    manifest["sessions"].push_back({{"id", s.id},
                                    {"file", blob_name(i)},
                                    {"channels", kChannels},
                                    {"samples", s.n_samples},
                                    {"steps", s.n_steps()},
                                    {"seed", s.seed}});
  }
  manifest["hash"] = dataset_hash(dataset);
  write_file_atomic(dir / "manifest.json", manifest.dump(2));
}

Dataset load_dataset(const fs::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest", e.what());
  }
  try {
    if (manifest.at("format").get<std::string>() != "WDEC") throw FormatError("format", "not a WDEC manifest");
    if (manifest.at("version").get<std::uint32_t>() != kDatasetVersion)
      throw FormatError("version", "unsupported manifest version " + manifest.at("version").dump());

    const auto& entries = manifest.at("sessions");
    if (entries.size() != manifest.at("n_sessions").get<std::size_t>())
      throw ShapeError("n_sessions", "manifest lists " + std::to_string(entries.size()) + " sessions");

    std::vector<std::shared_ptr<const Session>> sessions;
    for (const auto& e : entries) {
      const auto file = e.at("file").get<std::string>();
      const auto channels = e.at("channels").get<std::uint64_t>();
      const auto samples = e.at("samples").get<std::uint64_t>();
      const auto steps = e.at("steps").get<std::uint64_t>();
      if (channels != kChannels)
        throw ShapeError("channels", file + ": expected " + std::to_string(kChannels) + ", manifest declares " +
                                         std::to_string(channels));

      const std::string bytes = read_file(dir / file);
      ByteReader r(bytes, file);
      if (r.take(4, "magic") != std::string_view(kDatasetMagic, 4)) throw FormatError("magic", file + ": bad magic bytes");
      if (const auto v = r.u32("version"); v != kDatasetVersion)
        throw FormatError("version", file + ": unsupported blob version " + std::to_string(v));
      const auto blob_channels = r.u32("channels");
      const auto blob_samples = r.u64("samples");
      const auto blob_steps = r.u64("steps");
      if (blob_channels != channels) throw ShapeError("channels", file + ": header disagrees with manifest");
      if (blob_samples != samples) throw ShapeError("samples", file + ": header disagrees with manifest");
      if (blob_steps != steps) throw ShapeError("steps", file + ": header disagrees with manifest");
      if (steps != target_steps_for(samples))
        throw ShapeError("steps", file + ": " + std::to_string(steps) + " target steps do not cover " +
                                      std::to_string(samples) + " samples");
      const std::uint64_t expected = 4 * (channels * samples + steps * 3);
      if (r.remaining() != expected)
        throw ShapeError("payload", file + ": payload has " + std::to_string(r.remaining()) + " bytes, declared shape needs " +
                                        std::to_string(expected));

      auto s = std::make_shared<Session>();
      s->id = e.at("id").get<int>();
      s->n_samples = samples;
      s->seed = e.at("seed").get<std::uint64_t>();
      s->raw.resize(channels * samples);
      s->targets.resize(steps * 3);
      r.f32s(s->raw, "raw");
      r.f32s(s->targets, "targets");
      sessions.push_back(std::move(s));
    }
    return make_dataset(std::move(sessions), manifest.at("config"), manifest.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest", e.what());
  }
}

}  // namespace wdec
