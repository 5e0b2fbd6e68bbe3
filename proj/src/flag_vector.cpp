#include "irforge/flag_vector.hpp"

#include <stdexcept>

#include "irforge/digest.hpp"

namespace irforge {

FlagVector FlagVector::from_string(std::string_view bits) {
  FlagVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw std::invalid_argument("genome strings contain only 0 and 1");
    v.bits_[i] = bits[i] == '1';
  }
  return v;
}

std::size_t FlagVector::popcount() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

std::vector<std::size_t> FlagVector::enabled() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::string FlagVector::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

std::string FlagVector::digest() const { return sha256_hex(to_string()); }

}  // namespace irforge
