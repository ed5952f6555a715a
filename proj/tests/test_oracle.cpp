#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spmoran/analytic.hpp"
#include "spmoran/errors.hpp"
#include "spmoran/oracle.hpp"

using namespace spmoran;

TEST_CASE("hitting closed forms at k=2, M=4") {
  const auto chain = make_size_chain(1, 4);
  const auto table = hitting_and_visits(chain);
  REQUIRE(table.size() == 3);
  CHECK(table[1].k == 2);
  CHECK(table[1].pbar_hit == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(table[1].pbar_noreturn == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(table[1].phat_noreturn == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("closed forms equal absorbing-chain linear algebra") {
  for (const int M : {2, 3, 4, 5, 8, 13, 21, 32}) {
    const auto chain = make_size_chain(1, M);
    const auto closed = hitting_and_visits(chain);
    const auto solved = hitting_and_visits_solved(chain);
    REQUIRE(closed.size() == solved.size());
    for (std::size_t i = 0; i < closed.size(); ++i) {
      CHECK(std::abs(closed[i].pbar_hit - solved[i].pbar_hit) < 1e-12);
      CHECK(std::abs(closed[i].pbar_noreturn - solved[i].pbar_noreturn) < 1e-12);
      CHECK(std::abs(closed[i].phat_noreturn - solved[i].phat_noreturn) < 1e-12);
      CHECK(std::abs(closed[i].visits_die - solved[i].visits_die) <
            1e-12 * std::max(1.0, closed[i].visits_die));
      CHECK(std::abs(closed[i].visits_reach - solved[i].visits_reach) <
            1e-12 * std::max(1.0, closed[i].visits_reach));
    }
  }
}

TEST_CASE("conditioned man-hours, d=1 hand values") {
  CHECK(conditioned_manhours_die(make_size_chain(1, 4)) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(conditioned_manhours_die(make_size_chain(1, 2)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(conditioned_manhours_reach(make_size_chain(1, 4)) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(conditioned_manhours_reach(make_size_chain(1, 2)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("M=2 reduces to 1/q(1) for every dimension") {
  CHECK(conditioned_manhours_die(make_size_chain(1, 2)) == doctest::Approx(0.5));
  const auto c2 = make_size_chain(2, 2, M_PI);
  CHECK(conditioned_manhours_die(c2) == doctest::Approx(1.0 / c2.q(1)).epsilon(1e-12));
  const auto c3 = make_size_chain(3, 2, 0.66);
  CHECK(conditioned_manhours_die(c3) == doctest::Approx(1.0 / (6.0 * 0.66)).epsilon(1e-12));
}

TEST_CASE("sum and solve agree across dimensions and sizes") {
  for (const int M : {3, 10, 33, 100}) {
    for (int d = 1; d <= 3; ++d) {
      const double beta = d == 1 ? 0.0 : (d == 2 ? M_PI : 0.6595);
      const auto chain = make_size_chain(d, M, beta);
      CHECK(std::abs(conditioned_manhours_die_sum(chain) - conditioned_manhours_die_solve(chain)) <
            1e-10 * std::max(1.0, conditioned_manhours_die_sum(chain)));
      CHECK(std::abs(conditioned_manhours_reach_sum(chain) - conditioned_manhours_reach_solve(chain)) <
            1e-10 * std::max(1.0, conditioned_manhours_reach_sum(chain)));
    }
  }
}

TEST_CASE("q(k) conventions") {
  CHECK(make_size_chain(1, 4).q(3) == 2.0);
  const auto c2 = make_size_chain(2, 8, M_PI);
  CHECK(c2.q(1) == doctest::Approx(4.0 * M_PI / std::log(2.0)));
  CHECK(c2.q(5) == doctest::Approx(4.0 * M_PI * 5.0 / std::log(5.0)));
  const auto c3 = make_size_chain(3, 8, 0.6595);
  CHECK(c3.q(7) == doctest::Approx(2.0 * 3.0 * 0.6595 * 7.0));
}

TEST_CASE("small family bounds") {
  const auto b1 = small_family_bounds(1, 1e-6, 0.1);
  CHECK(b1.total == doctest::Approx(0.0025 * std::cbrt(1e-6)).epsilon(1e-12));
  CHECK(b1.rate_die == doctest::Approx(std::cbrt(1e-6) * 0.01 / 12.0).epsilon(1e-12));
  CHECK(b1.rate_notyet == doctest::Approx(std::cbrt(1e-6) * 0.01 / 6.0).epsilon(1e-12));

  const auto b3 = small_family_bounds(3, 1e-4, 0.1, 0.6595);
  CHECK(b3.total == doctest::Approx(std::sqrt(1e-4) * 0.1 / (6.0 * 0.6595)).epsilon(1e-12));
  CHECK(b3.total == doctest::Approx(0.02527 * std::sqrt(1e-4)).epsilon(1e-3));

  const auto b2 = small_family_bounds(2, 1e-4, 0.1, M_PI);
  const double s2 = std::sqrt(1e-4 * std::log(1e4));
  CHECK(b2.total == doctest::Approx(7.0 * 0.1 / (24.0 * M_PI) * s2).epsilon(1e-12));

  // monotone increasing in eps and vanishing as eps -> 0
  double prev = 0.0;
  for (const double eps : {0.01, 0.02, 0.05, 0.1, 0.5}) {
    const double t = small_family_bounds(1, 1e-6, eps).total;
    CHECK(t > prev);
    prev = t;
  }
  CHECK(small_family_bounds(1, 1e-6, 1e-9).total < 1e-18);
}

TEST_CASE("exact sums stay below the proof's integral bounds (d=1)") {
  for (const int M : {4, 16, 64}) {
    double sum = 0.0;
    for (int k = 1; k <= M; ++k) {
      const double frac = 1.0 - static_cast<double>(k) / M;
      sum += frac * frac * k;
    }
    CHECK(sum <= M * M / 12.0);
    double sum2 = 0.0;
    for (int k = 1; k <= M; ++k) sum2 += (M - k) * static_cast<double>(k) * k;
    CHECK(2.0 / M * sum2 <= std::pow(M, 3) / 6.0);
  }
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(make_size_chain(1, 1), std::domain_error);
  CHECK_THROWS_AS(make_size_chain(2, 8, 0.0), std::domain_error);
  CHECK_THROWS_AS(make_size_chain(4, 8, 1.0), std::domain_error);
  CHECK_THROWS_AS(conditioned_manhours_die(make_size_chain(1, 2000)), std::invalid_argument);
  CHECK_THROWS_AS(hitting_and_visits(make_size_chain(1, 8, 0.0, 1.2)), std::domain_error);
  CHECK_THROWS_AS(nu_exact(make_size_chain(1, 2), -1.0, 100), std::domain_error);
}

TEST_CASE("nu_exact matches the Airy constant as u2 -> 0 (d=1)") {
  // In d=1 the size chain is the lattice family-size process exactly, so
  // nu_exact / (gamma_1 u^{1/3}) -> 1.
  const double gamma1 = gamma_d(1);
  const double nu6 = nu_exact(make_size_chain(1, 2), 1e-6, 20'000);
  const double nu9 = nu_exact(make_size_chain(1, 2), 1e-9, 200'000);
  const double r6 = nu6 / (gamma1 * std::cbrt(1e-6));
  const double r9 = nu9 / (gamma1 * std::cbrt(1e-9));
  CHECK(r6 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r9 == doctest::Approx(1.0).epsilon(0.01));
  // convergence: the u2 = 1e-9 ratio sits closer to 1
  CHECK(std::abs(r9 - 1.0) < std::abs(r6 - 1.0));
  CHECK(nu_exact(make_size_chain(1, 2), 0.0, 100) == 0.0);
}

TEST_CASE("nu_exact truncation is converged") {
  const double a = nu_exact(make_size_chain(1, 2), 1e-6, 10'000);
  const double b = nu_exact(make_size_chain(1, 2), 1e-6, 20'000);
  CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("nu_exact responds to bias the right way") {
  const double nu_neutral = nu_exact(make_size_chain(1, 2), 1e-6, 20'000);
  const double nu_up = nu_exact(make_size_chain(1, 2, 0.0, 1.001), 1e-6, 20'000);
  const double nu_down = nu_exact(make_size_chain(1, 2, 0.0, 0.999), 1e-6, 20'000);
  CHECK(nu_up > nu_neutral);
  CHECK(nu_down < nu_neutral);
}
