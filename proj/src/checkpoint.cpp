#include "wdec/checkpoint.hpp"

#include "wdec/error.hpp"
#include "wdec/io.hpp"

namespace wdec {

namespace fs = std::filesystem;

nlohmann::json model_config_to_json(const ModelConfig& c) {
  nlohmann::json j{{"architecture", to_string(c.head)},
                   {"frontend", to_string(c.frontend)},
                   {"seed", c.seed},
                   {"extractor_dropout", c.extractor_dropout},
                   {"head_dropout", c.head_dropout},
                   {"cfo_squeeze", c.cfo_squeeze}};
  if (c.initial_frequencies) j["initial_frequencies"] = *c.initial_frequencies;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.head = head_kind_from_string(j.at("architecture").get<std::string>());
    c.frontend = frontend_mode_from_string(j.at("frontend").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.extractor_dropout = j.value("extractor_dropout", 0.5);
    c.head_dropout = j.value("head_dropout", 0.5);
    c.cfo_squeeze = j.value("cfo_squeeze", false);
    if (j.contains("initial_frequencies")) c.initial_frequencies = j["initial_frequencies"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest", e.what());
  }
  return c;
}

void save_checkpoint(const fs::path& dir, EndToEndModel& model, std::size_t epoch, const nlohmann::json& extra) {
  fs::create_directories(dir);
  const auto state = model.state();
  std::size_t total = 0;
  for (const auto& s : state) total += s.values->size();

  ByteWriter narrow;
  ByteWriter wide;
  for (ByteWriter* w : {&narrow, &wide}) {
    w->put_bytes(std::string_view(kCheckpointMagic, 4));
    w->put_u32(kCheckpointVersion);
    w->put_u64(total);
  }

  nlohmann::json layers = nlohmann::json::array();
  std::size_t offset = 0;
  std::vector<float> tmp;
  for (const auto& s : state) {
    tmp.assign(s.values->begin(), s.values->end());
    narrow.put_f32s(tmp);
    wide.put_f64s(*s.values);
    layers.push_back({{"name", s.name}, {"size", s.values->size()}, {"offset", offset}});
    offset += s.values->size();
  }

  nlohmann::json counts = nlohmann::json::array();
  for (const auto& l : model.count_parameters()) counts.push_back({{"layer", l.layer}, {"parameters", l.parameters}});

  nlohmann::json manifest = model_config_to_json(model.config());
  manifest["format"] = "WDCK";
  manifest["version"] = kCheckpointVersion;
  manifest["epoch"] = epoch;
  manifest["layers"] = layers;
  manifest["parameter_counts"] = counts;
  manifest["value_count"] = total;
  manifest["blob"] = "params.bin";
  manifest["blob64"] = "params64.bin";
  manifest["frequencies_hz"] = model.extractor().bank().frequencies();
  manifest["extra"] = extra;

  write_file_atomic(dir / "params.bin", narrow.str());
  write_file_atomic(dir / "params64.bin", wide.str());
  write_file_atomic(dir / "manifest.json", manifest.dump(2));
}

namespace {

nlohmann::json read_manifest(const fs::path& dir) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest", e.what());
  }
  if (m.value("format", "") != "WDCK") throw FormatError("format", "not a model checkpoint");
  if (m.value("version", 0U) != kCheckpointVersion)
    throw FormatError("version", "unsupported checkpoint version " + m.value("version", nlohmann::json()).dump());
  return m;
}

std::vector<double> read_blob(const fs::path& path, bool wide, std::size_t expected) {
  const std::string bytes = read_file(path);
  ByteReader r(bytes, path.filename().string());
  if (r.take(4, "magic") != std::string_view(kCheckpointMagic, 4)) throw FormatError("magic", "bad checkpoint magic");
  if (r.u32("version") != kCheckpointVersion) throw FormatError("version", "unsupported blob version");
  const std::uint64_t n = r.u64("value_count");
  if (n != expected)
    throw ShapeError("value_count", "blob holds " + std::to_string(n) + " values, manifest says " +
                                        std::to_string(expected));
  std::vector<double> values(n);
  if (wide) {
    r.f64s(values, "values");
  } else {
    std::vector<float> f(n);
    r.f32s(f, "values");
    values.assign(f.begin(), f.end());
  }
  if (r.remaining() != 0) throw FormatError("values", "trailing bytes after payload");
  return values;
}

}  // namespace

std::map<std::string, std::vector<double>> read_checkpoint_tensors(const fs::path& dir, bool wide) {
  const nlohmann::json m = read_manifest(dir);
  const auto total = m.at("value_count").get<std::size_t>();
  const bool have_wide = fs::exists(dir / m.value("blob64", "params64.bin"));
  const auto values = read_blob(dir / (wide && have_wide ? m.value("blob64", "params64.bin") : m.value("blob", "params.bin")),
                                wide && have_wide, total);
  std::map<std::string, std::vector<double>> out;
  for (const auto& l : m.at("layers")) {
    const auto off = l.at("offset").get<std::size_t>();
    const auto size = l.at("size").get<std::size_t>();
    if (off + size > values.size()) throw ShapeError(l.at("name").get<std::string>(), "layer exceeds blob");
    out[l.at("name").get<std::string>()] = std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(off),
                                                               values.begin() + static_cast<std::ptrdiff_t>(off + size));
  }
  return out;
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  LoadedCheckpoint lc;
  lc.manifest = read_manifest(dir);
  lc.meta.config = model_config_from_json(lc.manifest);
  lc.meta.epoch = lc.manifest.value("epoch", std::size_t{0});
  lc.meta.extra = lc.manifest.value("extra", nlohmann::json::object());
  lc.model = std::make_unique<EndToEndModel>(lc.meta.config);

  const auto tensors = read_checkpoint_tensors(dir);
  for (const auto& s : lc.model->state()) {
    const auto it = tensors.find(s.name);
    if (it == tensors.end()) throw FormatError(s.name, "missing from checkpoint");
    if (it->second.size() != s.values->size())
      throw ShapeError(s.name, "checkpoint holds " + std::to_string(it->second.size()) + " values, model expects " +
                                   std::to_string(s.values->size()));
    *s.values = it->second;
  }
  lc.model->sync();
  return lc;
}

}  // namespace wdec
