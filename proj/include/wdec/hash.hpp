#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace wdec {

class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  template <class Range>
  void update_pod(const Range& values) {
    update(std::as_bytes(std::span(values)));
  }
  std::string hex();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Dataset;

// Content hash over session payloads and the window/target list.
std::string dataset_hash(const Dataset& dataset);

}  // namespace wdec
