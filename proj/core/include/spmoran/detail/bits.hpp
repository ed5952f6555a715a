#pragma once

#include <cstdint>

namespace spmoran::detail {

/// Finalizer from SplitMix64; a cheap full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace spmoran::detail
