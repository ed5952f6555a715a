#include <doctest.h>

#include <cmath>
#include <unordered_map>
#include <vector>

#include "spmoran/detail/flat_map.hpp"
#include "spmoran/rng.hpp"

using namespace spmoran;

TEST_CASE("streams are deterministic and distinct") {
  RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool all_equal_c = true, all_equal_d = true;
  for (int i = 0; i < 64; ++i) {
    const auto xa = a.next_u64();
    CHECK(xa == b.next_u64());
    all_equal_c = all_equal_c && xa == c.next_u64();
    all_equal_d = all_equal_d && xa == d.next_u64();
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniform doubles live in [0,1) and have the right mean") {
  RngStream rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100'000 - 0.5) < 0.005);
}

TEST_CASE("next_below is in range and roughly uniform") {
  RngStream rng(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70'000; ++i) counts[rng.next_below(7)]++;
  for (int k = 0; k < 7; ++k) {
    CHECK(counts[k] > 9'500);
    CHECK(counts[k] < 10'500);
  }
}

TEST_CASE("exponential and normal moments") {
  RngStream rng(3);
  double se = 0.0, sn = 0.0, sn2 = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    se += rng.next_exponential(2.0);
    const double z = rng.next_normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(se / n - 0.5) < 0.005);
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(std::abs(sn2 / n - 1.0) < 0.02);
}

TEST_CASE("flat site map agrees with a reference map under random churn") {
  detail::FlatSiteMap<int> map;
  std::unordered_map<std::uint64_t, int> ref;
  RngStream rng(99);
  for (int step = 0; step < 200'000; ++step) {
    const auto raw = rng.next_below(512) + 1;  // small key space forces collisions
    const SiteKey key = static_cast<SiteKey>(raw) << 40 | raw;
    const auto op = rng.next_below(3);
    if (op == 0) {
      map.get_or_insert(key) = static_cast<int>(step);
      ref[raw] = static_cast<int>(step);
    } else if (op == 1) {
      CHECK(map.erase(key) == (ref.erase(raw) > 0));
    } else {
      const int* v = map.find(key);
      const auto it = ref.find(raw);
      if (it == ref.end()) {
        CHECK(v == nullptr);
      } else {
        REQUIRE(v != nullptr);
        CHECK(*v == it->second);
      }
    }
    if (step % 10'000 == 0) {
      CHECK(map.size() == ref.size());
      std::size_t seen = 0;
      map.for_each([&](SiteKey k, const int& v) {
        ++seen;
        const auto it = ref.find(static_cast<std::uint64_t>(k) & 0xFFFFFFFFFFULL);
        REQUIRE(it != ref.end());
        CHECK(it->second == v);
      });
      CHECK(seen == ref.size());
    }
  }
}

TEST_CASE("flat map reserve_extra keeps pointers stable across batched inserts") {
  detail::FlatSiteMap<int> map;
  map.reserve_extra(8);
  int* first = &map.get_or_insert(123456);
  *first = 7;
  for (SiteKey k = 1; k <= 7; ++k) map.get_or_insert(k) = static_cast<int>(k);
  CHECK(*first == 7);
  CHECK(*map.find(123456) == 7);
}
