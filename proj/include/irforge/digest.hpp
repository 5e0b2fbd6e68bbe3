#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace irforge {

// Incremental SHA-256. Keys are built by feeding length-prefixed fields so
// that ("ab","c") and ("a","bc") never collide.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  Sha256& field(std::string_view bytes);
  std::string hex();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

// FNV-1a followed by a splitmix64 finalizer; stable across platforms.
std::uint64_t stable_hash64(std::string_view bytes, std::uint64_t seed = 0);

}  // namespace irforge
