#include "wdec/hash.hpp"

#include <array>
#include <cstdio>

#include <openssl/evp.h>

#include "wdec/data.hpp"

namespace wdec {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

void Sha256::update(std::span<const std::byte> bytes) { EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size()); }

void Sha256::update(std::string_view text) { EVP_DigestUpdate(impl_->ctx, text.data(), text.size()); }

std::string Sha256::hex() {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string dataset_hash(const Dataset& dataset) {
  Sha256 h;
  for (const auto& s : dataset.sessions) {
    const std::array<std::uint64_t, 3> head{static_cast<std::uint64_t>(s->id), s->n_samples, s->n_steps()};
    h.update_pod(head);
    h.update_pod(s->raw);
    h.update_pod(s->targets);
  }
  for (const auto& w : dataset.windows) {
    const std::array<std::uint64_t, 2> head{w.session, w.start};
    h.update_pod(head);
    for (const auto& step : w.target.steps) {
      const std::array<float, 3> f{static_cast<float>(step[0]), static_cast<float>(step[1]), static_cast<float>(step[2])};
      h.update_pod(f);
    }
  }
  return h.hex();
}

}  // namespace wdec
