#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace latpred {

// FNV-1a 64-bit; used for artifact and training-set fingerprints in manifests
// and model metadata (bookkeeping, not cryptography).
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::string_view bytes);
std::string digest_file(const std::string& path);

}  // namespace latpred
