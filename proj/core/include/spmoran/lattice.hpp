#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>

#include "spmoran/detail/bits.hpp"

namespace spmoran {

/// Integer key identifying a site. Wide enough to pack three 31-bit shifted
/// coordinates on the unbounded lattice; torus keys are plain row-major
/// indices and fit comfortably in the low 64 bits.
using SiteKey = unsigned __int128;

/// A lattice point. Coordinates beyond the geometry's dimension stay zero,
/// so equality and hashing never need to know the dimension.
struct Site {
  std::array<std::int32_t, 3> c{0, 0, 0};

  friend bool operator==(const Site&, const Site&) = default;
};

std::ostream& operator<<(std::ostream& os, const Site& s);

/// Geometry of the simulation arena: either the torus (Z mod L)^d with
/// N = L^d sites, or the full unbounded lattice Z^d. dimension in {1,2,3};
/// the torus requires L >= 3 so the 2d nearest neighbors are distinct.
class Geometry {
 public:
  enum class Topology { Torus, Unbounded };

  static Geometry torus(int dimension, std::int32_t side);
  static Geometry unbounded(int dimension);

  int dimension() const { return dim_; }
  Topology topology() const { return topo_; }
  bool is_torus() const { return topo_ == Topology::Torus; }
  std::int32_t side() const { return side_; }

  /// Number of sites; valid for the torus only.
  std::uint64_t site_count() const;

 private:
  Geometry(int dim, Topology topo, std::int32_t side) : dim_(dim), topo_(topo), side_(side) {}
  int dim_;
  Topology topo_;
  std::int32_t side_;  // 0 when unbounded
};

/// Fixed-capacity neighbor list (2d entries, axis order, minus before plus).
struct NeighborList {
  std::array<Site, 6> sites;
  int count = 0;
  const Site* begin() const { return sites.data(); }
  const Site* end() const { return sites.data() + count; }
  const Site& operator[](int i) const { return sites[static_cast<std::size_t>(i)]; }
};

/// The 2d nearest neighbors of x, wrapped mod L on the torus. Order is
/// deterministic: axis 0 minus, axis 0 plus, axis 1 minus, ...
NeighborList neighbors(const Geometry& g, const Site& x);

/// Neighbor in a single direction d in [0, 2*dimension): axis d/2, minus
/// for even d, plus for odd d. Matches the ordering of neighbors().
Site neighbor(const Geometry& g, const Site& x, int direction);

/// Direction index of the opposite step (x -> y -> x round trip).
constexpr int opposite_direction(int direction) { return direction ^ 1; }

/// Injective key for a site: row-major index on the torus, packed 31-bit
/// shifted coordinates on the unbounded lattice. Unbounded coordinates must
/// satisfy |c| < 2^30; anything larger throws std::overflow_error rather
/// than silently colliding.
SiteKey encode(const Geometry& g, const Site& x);

/// Inverse of encode().
Site decode(const Geometry& g, SiteKey key);

/// True if x is a valid site for g (torus coordinates reduced to [0, L),
/// unbounded coordinates within packing bounds).
bool site_valid(const Geometry& g, const Site& x);

namespace detail {

/// 64-bit mix of a SiteKey for open-addressed tables.
inline std::uint64_t hash_key(SiteKey k) {
  const auto lo = static_cast<std::uint64_t>(k);
  const auto hi = static_cast<std::uint64_t>(k >> 64);
  return mix64(lo ^ (hi * 0x9e3779b97f4a7c15ULL + 0x165667b19e3779f9ULL));
}

}  // namespace detail

}  // namespace spmoran
