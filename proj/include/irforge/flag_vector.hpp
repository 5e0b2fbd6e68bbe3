#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace irforge {

// GA genome: one bit per catalog flag. Length is fixed at construction.
class FlagVector {
 public:
  FlagVector() = default;
  explicit FlagVector(std::size_t length) : bits_(length, 0) {}

  static FlagVector from_string(std::string_view bits);

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }
  std::size_t popcount() const;
  std::vector<std::size_t> enabled() const;

  /// '0'/'1' string, index 0 first.
  std::string to_string() const;
  /// SHA-256 of the bit string.
  std::string digest() const;

  friend bool operator==(const FlagVector&, const FlagVector&) = default;
  friend auto operator<=>(const FlagVector&, const FlagVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace irforge
