#pragma once

#include <cmath>
#include <cstdint>

#include "spmoran/detail/bits.hpp"

namespace spmoran {

namespace detail {

struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() { return mix64(state += 0x9e3779b97f4a7c15ULL); }
};

}  // namespace detail

/// xoshiro256++ with SplitMix64 seeding. Replica r of a run with base seed s
/// uses RngStream(s, r); distinct (seed, stream) pairs give statistically
/// independent streams, and every draw is a pure integer computation, so
/// sequences are bit-identical across platforms and thread counts.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    detail::SplitMix64 a(seed);
    detail::SplitMix64 b(0x9e3779b97f4a7c15ULL ^ (stream + 1) * 0xd1342543de82ef95ULL);
    for (auto& w : s_) w = a.next() ^ b.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential holding time with the given rate; log1p keeps the draw
  /// finite even when next_double() returns 0.
  double next_exponential(double rate) { return -std::log1p(-next_double()) / rate; }

  /// Uniform integer in [0, n). Lemire's multiply-then-reject; unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via the polar method; the spare value is cached so one
  /// call consumes a deterministic position in the stream given the history.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace spmoran
