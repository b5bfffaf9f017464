#include "wdec/config_file.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "wdec/error.hpp"
#include "wdec/io.hpp"

namespace wdec {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> list_of(const std::string& key, const std::string& v, F conv) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<T>(conv(key, item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"synth.n_sessions", [](RunConfig& c, auto& k, auto& v) { c.synth.n_sessions = to_uint(k, v); }},
      {"synth.session_duration_s", [](RunConfig& c, auto& k, auto& v) { c.synth.session_duration_s = to_double(k, v); }},
      {"synth.bands",
       [](RunConfig& c, auto& k, auto& v) {
         c.synth.bands.clear();
         for (const auto& item : split_list(v)) {
           const auto colon = item.find(':');
           Band b;
           b.center_hz = to_double(k, trim(item.substr(0, colon)));
           if (colon != std::string::npos) b.bandwidth_hz = to_double(k, trim(item.substr(colon + 1)));
           c.synth.bands.push_back(b);
         }
         if (c.synth.bands.empty()) throw ConfigError(k, "empty list");
       }},
      {"synth.weight_scale", [](RunConfig& c, auto& k, auto& v) { c.synth.weight_scale = to_double(k, v); }},
      {"synth.noise_exponent", [](RunConfig& c, auto& k, auto& v) { c.synth.noise_exponent = to_double(k, v); }},
      {"synth.noise_rms", [](RunConfig& c, auto& k, auto& v) { c.synth.noise_rms = to_double(k, v); }},
      {"synth.snr", [](RunConfig& c, auto& k, auto& v) { c.synth.snr = to_double(k, v); }},
      {"synth.walk_step", [](RunConfig& c, auto& k, auto& v) { c.synth.walk_step = to_double(k, v); }},
      {"synth.seed", [](RunConfig& c, auto& k, auto& v) { c.synth.seed = to_uint(k, v); }},

      {"train.learning_rate", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.learning_rate = to_double(k, v); }},
      {"train.weight_decay", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.weight_decay = to_double(k, v); }},
      {"train.batch_size", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.batch_size = to_uint(k, v); }},
      {"train.max_epochs", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.max_epochs = to_uint(k, v); }},
      {"train.patience", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.patience = to_uint(k, v); }},
      {"train.pretrain_freeze_epochs",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.train.pretrain_freeze_epochs = to_uint(k, v); }},
      {"train.valid_fraction", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.valid_fraction = to_double(k, v); }},
      {"train.chronological_split",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.train.chronological_split = to_bool(k, v); }},
      {"train.seed", [](RunConfig& c, auto& k, auto& v) { c.experiment.train.seed = to_uint(k, v); }},

      {"model.extractor_dropout", [](RunConfig& c, auto& k, auto& v) { c.experiment.extractor_dropout = to_double(k, v); }},
      {"model.head_dropout", [](RunConfig& c, auto& k, auto& v) { c.experiment.head_dropout = to_double(k, v); }},
      {"model.cfo_squeeze", [](RunConfig& c, auto& k, auto& v) { c.experiment.cfo_squeeze = to_bool(k, v); }},
      {"model.initial_frequencies",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.initial_frequencies = list_of<double>(k, v, to_double); }},

      {"experiment.models",
       [](RunConfig& c, auto& k, auto& v) {
         c.experiment.models.clear();
         for (const auto& m : split_list(v)) c.experiment.models.push_back(head_kind_from_string(m));
         if (c.experiment.models.empty()) throw ConfigError(k, "empty list");
       }},
      {"experiment.frontends",
       [](RunConfig& c, auto& k, auto& v) {
         c.experiment.frontends.clear();
         for (const auto& m : split_list(v)) c.experiment.frontends.push_back(frontend_mode_from_string(m));
         if (c.experiment.frontends.empty()) throw ConfigError(k, "empty list");
       }},
      {"experiment.n_runs", [](RunConfig& c, auto& k, auto& v) { c.experiment.n_runs = to_uint(k, v); }},
      {"experiment.seeds",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.seeds = list_of<std::uint64_t>(k, v, to_uint); }},
      {"experiment.calibration_sessions",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.calibration_sessions = to_uint(k, v); }},
      {"experiment.sizes", [](RunConfig& c, auto& k, auto& v) { c.experiment.sizes = list_of<std::size_t>(k, v, to_uint); }},
      {"experiment.fractions",
       [](RunConfig& c, auto& k, auto& v) { c.experiment.fractions = list_of<double>(k, v, to_double); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "synth" && section != "train" && section != "model" && section != "experiment")
        throw ConfigError(section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no), "key outside of a [section]");
    const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (!cfg.explicit_keys.insert(key).second) throw ConfigError(key, "duplicate key");
    it->second(cfg, key, value);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

nlohmann::json RunConfig::to_json() const {
  return {{"synth", synth.to_json()}, {"experiment", experiment.to_json()}};
}

}  // namespace wdec
