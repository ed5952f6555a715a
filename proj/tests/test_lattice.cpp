#include <doctest.h>

#include <set>
#include <stdexcept>
#include <vector>

#include "spmoran/lattice.hpp"
#include "spmoran/rng.hpp"

using namespace spmoran;

namespace {

Site site(std::int32_t a, std::int32_t b = 0, std::int32_t c = 0) { return Site{{a, b, c}}; }

Site random_site(const Geometry& g, RngStream& rng) {
  Site s;
  for (int axis = 0; axis < g.dimension(); ++axis) {
    if (g.is_torus())
      s.c[axis] = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(g.side())));
    else
      s.c[axis] = static_cast<std::int32_t>(rng.next_below(2'000'001)) - 1'000'000;
  }
  return s;
}

std::vector<Geometry> all_geometries() {
  return {Geometry::torus(1, 5),   Geometry::torus(2, 10),  Geometry::torus(3, 7),
          Geometry::unbounded(1),  Geometry::unbounded(2),  Geometry::unbounded(3)};
}

}  // namespace

TEST_CASE("neighbor enumeration matches the axis-order convention") {
  {
    const auto g = Geometry::torus(1, 5);
    const auto nb = neighbors(g, site(0));
    REQUIRE(nb.count == 2);
    CHECK(nb[0] == site(4));
    CHECK(nb[1] == site(1));
  }
  {
    const auto g = Geometry::unbounded(2);
    const auto nb = neighbors(g, site(0, 0));
    REQUIRE(nb.count == 4);
    CHECK(nb[0] == site(-1, 0));
    CHECK(nb[1] == site(1, 0));
    CHECK(nb[2] == site(0, -1));
    CHECK(nb[3] == site(0, 1));
  }
  {
    const auto g = Geometry::torus(3, 3);
    const auto nb = neighbors(g, site(2, 0, 1));
    REQUIRE(nb.count == 6);
    CHECK(nb[0] == site(1, 0, 1));
    CHECK(nb[1] == site(0, 0, 1));
    CHECK(nb[2] == site(2, 2, 1));
    CHECK(nb[3] == site(2, 1, 1));
    CHECK(nb[4] == site(2, 0, 0));
    CHECK(nb[5] == site(2, 0, 2));
  }
}

TEST_CASE("single-direction neighbor agrees with the full enumeration") {
  RngStream rng(7);
  for (const auto& g : all_geometries()) {
    for (int i = 0; i < 100; ++i) {
      const Site x = random_site(g, rng);
      const auto nb = neighbors(g, x);
      for (int dir = 0; dir < nb.count; ++dir) {
        CHECK(neighbor(g, x, dir) == nb[dir]);
        CHECK(neighbor(g, nb[dir], opposite_direction(dir)) == x);
      }
    }
  }
}

TEST_CASE("neighbor symmetry and count") {
  RngStream rng(11);
  for (const auto& g : all_geometries()) {
    for (int i = 0; i < 200; ++i) {
      const Site x = random_site(g, rng);
      const auto nb = neighbors(g, x);
      CHECK(nb.count == 2 * g.dimension());
      for (const Site& y : nb) {
        const auto back = neighbors(g, y);
        bool found = false;
        for (const Site& z : back) found = found || z == x;
        CHECK(found);
      }
    }
  }
}

TEST_CASE("encode examples") {
  CHECK(static_cast<std::uint64_t>(encode(Geometry::torus(2, 10), site(3, 7))) == 73);
  CHECK(decode(Geometry::torus(2, 10), 73) == site(3, 7));
  CHECK(static_cast<std::uint64_t>(encode(Geometry::torus(1, 5), site(4))) == 4);
  CHECK(static_cast<std::uint64_t>(encode(Geometry::torus(3, 3), site(1, 1, 1))) == 13);
}

TEST_CASE("encode/decode round-trips on random sites") {
  RngStream rng(3);
  for (const auto& g : all_geometries()) {
    for (int i = 0; i < 10'000; ++i) {
      const Site x = random_site(g, rng);
      CHECK(decode(g, encode(g, x)) == x);
    }
  }
}

TEST_CASE("distinct sites get distinct keys") {
  RngStream rng(5);
  for (const auto& g : all_geometries()) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> keys;
    std::set<std::array<std::int32_t, 3>> sites;
    for (int i = 0; i < 2000; ++i) {
      const Site x = random_site(g, rng);
      const SiteKey k = encode(g, x);
      const bool new_site = sites.insert(x.c).second;
      const bool new_key =
          keys.insert({static_cast<std::uint64_t>(k >> 64), static_cast<std::uint64_t>(k)}).second;
      CHECK(new_site == new_key);
    }
  }
}

TEST_CASE("unbounded packing bound is a detectable error") {
  const auto g = Geometry::unbounded(3);
  const std::int32_t big = 1 << 30;
  CHECK_THROWS_AS(encode(g, site(big, 0, 0)), std::overflow_error);
  CHECK_THROWS_AS(encode(g, site(0, -big, 0)), std::overflow_error);
  CHECK_NOTHROW(encode(g, site(big - 1, -(big - 1), big - 1)));
  CHECK(site_valid(g, site(big - 1)));
  CHECK_FALSE(site_valid(g, site(big)));
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(Geometry::torus(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(Geometry::torus(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(Geometry::torus(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(Geometry::unbounded(0), std::invalid_argument);
  CHECK(Geometry::torus(3, 3).site_count() == 27);
  CHECK(Geometry::torus(1, 1000).site_count() == 1000);
}
