#include "spmoran/lattice.hpp"

#include <ostream>
#include <stdexcept>

namespace spmoran {

namespace {

// Unbounded-lattice packing: each coordinate is shifted by 2^30 into a
// 31-bit field. |c| < 2^30 keeps every field in [1, 2^31), so a packed key
// is never zero and never collides.
constexpr std::int64_t kPackBound = std::int64_t{1} << 30;
constexpr int kFieldBits = 31;
constexpr std::uint64_t kFieldMask = (std::uint64_t{1} << kFieldBits) - 1;

}  // namespace

std::ostream& operator<<(std::ostream& os, const Site& s) {
  return os << '(' << s.c[0] << ',' << s.c[1] << ',' << s.c[2] << ')';
}

Geometry Geometry::torus(int dimension, std::int32_t side) {
  if (dimension < 1 || dimension > 3) throw std::invalid_argument("Geometry: dimension must be 1, 2 or 3");
  if (side < 3) throw std::invalid_argument("Geometry: torus side must be >= 3");
  return Geometry(dimension, Topology::Torus, side);
}

Geometry Geometry::unbounded(int dimension) {
  if (dimension < 1 || dimension > 3) throw std::invalid_argument("Geometry: dimension must be 1, 2 or 3");
  return Geometry(dimension, Topology::Unbounded, 0);
}

std::uint64_t Geometry::site_count() const {
  if (topo_ != Topology::Torus) throw std::logic_error("Geometry: site_count is defined for the torus only");
  std::uint64_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= static_cast<std::uint64_t>(side_);
  return n;
}

NeighborList neighbors(const Geometry& g, const Site& x) {
  NeighborList out;
  const int d = g.dimension();
  out.count = 2 * d;
  for (int axis = 0; axis < d; ++axis) {
    Site minus = x;
    Site plus = x;
    if (g.is_torus()) {
      const std::int32_t L = g.side();
      minus.c[axis] = (x.c[axis] == 0) ? L - 1 : x.c[axis] - 1;
      plus.c[axis] = (x.c[axis] == L - 1) ? 0 : x.c[axis] + 1;
    } else {
      minus.c[axis] = x.c[axis] - 1;
      plus.c[axis] = x.c[axis] + 1;
    }
    out.sites[static_cast<std::size_t>(2 * axis)] = minus;
    out.sites[static_cast<std::size_t>(2 * axis + 1)] = plus;
  }
  return out;
}

Site neighbor(const Geometry& g, const Site& x, int direction) {
  const int axis = direction >> 1;
  const int step = (direction & 1) ? 1 : -1;
  Site y = x;
  if (g.is_torus()) {
    const std::int32_t L = g.side();
    std::int32_t v = x.c[axis] + step;
    if (v < 0) v = L - 1;
    if (v >= L) v = 0;
    y.c[axis] = v;
  } else {
    y.c[axis] = x.c[axis] + step;
  }
  return y;
}

bool site_valid(const Geometry& g, const Site& x) {
  for (int axis = 0; axis < g.dimension(); ++axis) {
    const std::int64_t v = x.c[axis];
    if (g.is_torus()) {
      if (v < 0 || v >= g.side()) return false;
    } else {
      if (v <= -kPackBound || v >= kPackBound) return false;
    }
  }
  for (int axis = g.dimension(); axis < 3; ++axis)
    if (x.c[axis] != 0) return false;
  return true;
}

SiteKey encode(const Geometry& g, const Site& x) {
  if (g.is_torus()) {
    const auto L = static_cast<std::uint64_t>(g.side());
    std::uint64_t key = 0;
    std::uint64_t scale = 1;
    for (int axis = 0; axis < g.dimension(); ++axis) {
      key += static_cast<std::uint64_t>(x.c[axis]) * scale;
      scale *= L;
    }
    return key;
  }
  SiteKey key = 0;
  for (int axis = 0; axis < g.dimension(); ++axis) {
    const std::int64_t v = x.c[axis];
    if (v <= -kPackBound || v >= kPackBound)
      throw std::overflow_error("encode: unbounded-lattice coordinate exceeds |c| < 2^30 packing bound");
    const auto field = static_cast<std::uint64_t>(v + kPackBound);
    key |= static_cast<SiteKey>(field) << (kFieldBits * axis);
  }
  return key;
}

Site decode(const Geometry& g, SiteKey key) {
  Site x;
  if (g.is_torus()) {
    auto rest = static_cast<std::uint64_t>(key);
    const auto L = static_cast<std::uint64_t>(g.side());
    for (int axis = 0; axis < g.dimension(); ++axis) {
      x.c[axis] = static_cast<std::int32_t>(rest % L);
      rest /= L;
    }
    return x;
  }
  for (int axis = 0; axis < g.dimension(); ++axis) {
    const auto field = static_cast<std::uint64_t>(key >> (kFieldBits * axis)) & kFieldMask;
    x.c[axis] = static_cast<std::int32_t>(static_cast<std::int64_t>(field) - kPackBound);
  }
  return x;
}

}  // namespace spmoran
