#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace pml {

// 64-bit FNV-1a, used to fingerprint corpora and parameter sets.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      hash_ ^= b;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view text) {
    update({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  }
  void update(std::span<const double> values) {
    update({reinterpret_cast<const std::uint8_t*>(values.data()),
            values.size_bytes()});
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace pml
