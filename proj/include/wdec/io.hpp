#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wdec {

// Writes via a sibling temp file and rename so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Little-endian binary builder/reader used by the dataset and checkpoint blobs.
class ByteWriter {
public:
  void put_bytes(std::string_view s) { buf_.append(s); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f32s(std::span<const float> v);
  void put_f64s(std::span<const double> v);
  const std::string& str() const { return buf_; }

private:
  std::string buf_;
};

class ByteReader {
public:
  explicit ByteReader(std::string_view data, std::string context) : data_(data), context_(std::move(context)) {}
  std::string_view take(std::size_t n, const char* field);
  std::uint32_t u32(const char* field);
  std::uint64_t u64(const char* field);
  void f32s(std::span<float> out, const char* field);
  void f64s(std::span<double> out, const char* field);
  std::size_t remaining() const { return data_.size() - pos_; }

private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace wdec
