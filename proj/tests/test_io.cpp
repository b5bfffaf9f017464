#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

#include "wdec/config_file.hpp"
#include "wdec/dataset_io.hpp"
#include "wdec/error.hpp"
#include "wdec/hash.hpp"
#include "wdec/io.hpp"

using namespace wdec;

namespace {

void patch_file(const std::filesystem::path& p, std::size_t offset, std::string_view bytes) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("sha256 known digests") {
  Sha256 h;
  h.update(std::string_view("abc"));
  CHECK(h.hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 e;
  CHECK(e.hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("byte reader round trip and truncation") {
  ByteWriter w;
  w.put_bytes("WDEC");
  w.put_u32(7);
  w.put_u64(1ULL << 40);
  std::vector<float> f{1.5F, -2.25F};
  std::vector<double> d{0.1, -1e-300};
  w.put_f32s(f);
  w.put_f64s(d);

  ByteReader r(w.str(), "buf");
  CHECK(r.take(4, "magic") == "WDEC");
  CHECK(r.u32("v") == 7);
  CHECK(r.u64("n") == (1ULL << 40));
  std::vector<float> f2(2);
  std::vector<double> d2(2);
  r.f32s(f2, "f");
  r.f64s(d2, "d");
  CHECK(f2 == f);
  CHECK(d2 == d);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u32("extra"), FormatError);
}

TEST_CASE("dataset save/load") {
  auto d = generate_synthetic(testutil::tiny_config(2, 2.0, 4));
  auto dir = testutil::scratch("dataset_rt");
  save_dataset(d, dir);

  SUBCASE("round trip is exact") {
    auto back = load_dataset(dir);
    REQUIRE(back.sessions.size() == d.sessions.size());
    for (std::size_t i = 0; i < d.sessions.size(); ++i) {
      CHECK(back.sessions[i]->raw == d.sessions[i]->raw);
      CHECK(back.sessions[i]->targets == d.sessions[i]->targets);
      CHECK(back.sessions[i]->id == d.sessions[i]->id);
    }
    CHECK(back.size() == d.size());
    CHECK(back.seed == d.seed);
    CHECK(back.config == d.config);
    CHECK(dataset_hash(back) == dataset_hash(d));
  }
  SUBCASE("corrupted magic") {
    patch_file(dir / "session_0000.bin", 0, "XXXX");
    try {
      load_dataset(dir);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.field() == "magic");
    }
  }
  SUBCASE("payload sized for 32 channels") {
    // Keep the 64-channel header but drop half of the raw payload.
    const auto blob = dir / "session_0000.bin";
    auto bytes = read_file(blob);
    const std::size_t header = 4 + 4 + 4 + 8 + 8;
    const auto& s = *d.sessions[0];
    const std::size_t half = 32 * s.n_samples * 4;
    std::string cut = bytes.substr(0, header + half) + bytes.substr(header + 2 * half);
    write_file_atomic(blob, cut);
    try {
      load_dataset(dir);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      CHECK(e.field() == "payload");
    }
  }
  SUBCASE("manifest channel count disagrees") {
    auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    manifest["sessions"][0]["channels"] = 32;
    write_file_atomic(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_dataset(dir), ShapeError);
  }
  SUBCASE("bad version") {
    auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    manifest["version"] = 99;
    write_file_atomic(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_dataset(dir), FormatError);
  }
  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_dataset(dir / "nope"), Error);
  }
}

TEST_CASE("run config parsing") {
  auto cfg = parse_run_config(R"(
# comment
[synth]
n_sessions = 4
bands = 20:10, 70:20
snr = 1.5

[train]
max_epochs = 3
patience = 2

[experiment]
models = mlp, cnn-lstm-mt
frontends = hand-crafted, e2e-cfo
sizes = 1, 2
)");
  CHECK(cfg.synth.n_sessions == 4);
  REQUIRE(cfg.synth.bands.size() == 2);
  CHECK(cfg.synth.bands[0].center_hz == 20.0);
  CHECK(cfg.synth.bands[1].bandwidth_hz == 20.0);
  CHECK(cfg.synth.snr == 1.5);
  CHECK(cfg.experiment.train.max_epochs == 3);
  CHECK(cfg.experiment.models.size() == 2);
  CHECK(cfg.experiment.frontends.size() == 2);
  CHECK(cfg.experiment.sizes == std::vector<std::size_t>{1, 2});
  CHECK(cfg.explicit_keys.count("synth.snr") == 1);

  auto expect_field = [](const std::string& text, const std::string& field) {
    try {
      parse_run_config(text);
      FAIL("expected ConfigError for " << field);
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field("[synth]\nbogus = 1\n", "synth.bogus");
  expect_field("[nope]\n", "nope");
  expect_field("[train]\nmax_epochs = abc\n", "train.max_epochs");
  expect_field("[synth]\nsnr = 1\nsnr = 2\n", "synth.snr");
}
