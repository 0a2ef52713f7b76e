#pragma once

#include <cstdint>
#include <string>

namespace dif {

/// FNV-1a 64-bit digest; the fixture manifests use it as a cheap,
/// dependency-free content fingerprint.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace dif
