#include "wdec/io.hpp"

#include <atomic>
#include <bit>
#include <thread>
#include <fstream>
#include <sstream>

#include "wdec/error.hpp"
#include "wdec/random.hpp"

namespace wdec {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<std::uint64_t> counter{0};
  const auto nonce = splitmix64(std::hash<std::thread::id>{}(std::this_thread::get_id()) ^ ++counter);
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(nonce % 1000000007ULL);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string(), "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(path.string(), "write failed");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::put_f32s(std::span<const float> v) {
  buf_.reserve(buf_.size() + 4 * v.size());
  for (float f : v) put_f32(f);
}

void ByteWriter::put_f64s(std::span<const double> v) {
  buf_.reserve(buf_.size() + 8 * v.size());
  for (double d : v) put_u64(std::bit_cast<std::uint64_t>(d));
}

std::string_view ByteReader::take(std::size_t n, const char* field) {
  if (remaining() < n)
    throw FormatError(field, context_ + ": truncated payload (need " + std::to_string(n) + " bytes, have " +
                                 std::to_string(remaining()) + ")");
  auto s = data_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::uint32_t ByteReader::u32(const char* field) {
  auto s = take(4, field);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64(const char* field) {
  auto s = take(8, field);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
  return v;
}

void ByteReader::f32s(std::span<float> out, const char* field) {
  auto s = take(4 * out.size(), field);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[4 * k + i])) << (8 * i);
    out[k] = std::bit_cast<float>(v);
  }
}

void ByteReader::f64s(std::span<double> out, const char* field) {
  for (auto& d : out) d = std::bit_cast<double>(u64(field));
}

}  // namespace wdec
