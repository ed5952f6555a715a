#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spmoran/rng.hpp"
#include "spmoran/stats.hpp"

using namespace spmoran;

TEST_CASE("ks statistic for a point mass at ln2/rate is exactly 1/2") {
  const double rate = 3.0;
  std::vector<double> samples(50, std::log(2.0) / rate);
  const auto r = ks_exponential(samples, rate);
  CHECK(std::abs(r.statistic - 0.5) < 1e-12);
}

TEST_CASE("ks under the null keeps p above 0.01 in almost all seeded trials") {
  int pass = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(1000 + static_cast<std::uint64_t>(t));
    std::vector<double> samples(2000);
    for (auto& x : samples) x = rng.next_exponential(0.7);
    if (ks_exponential(samples, 0.7).p_value > 0.01) ++pass;
  }
  CHECK(pass >= 98);
}

TEST_CASE("ks rejects a wrong rate") {
  RngStream rng(5);
  std::vector<double> samples(2000);
  for (auto& x : samples) x = rng.next_exponential(1.0);
  CHECK(ks_exponential(samples, 2.0).p_value < 1e-6);
}

TEST_CASE("ks is invariant under joint rescaling") {
  RngStream rng(6);
  std::vector<double> samples(500), scaled(500);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = rng.next_exponential(0.3);
    scaled[i] = samples[i] * 10.0;
  }
  const auto a = ks_exponential(samples, 0.3);
  const auto b = ks_exponential(scaled, 0.03);
  CHECK(std::abs(a.statistic - b.statistic) < 1e-12);
  CHECK(std::abs(a.p_value - b.p_value) < 1e-12);
}

TEST_CASE("ks domain errors") {
  CHECK_THROWS_AS(ks_exponential({}, 1.0), std::domain_error);
  std::vector<double> bad{1.0, -2.0};
  CHECK_THROWS_AS(ks_exponential(bad, 1.0), std::domain_error);
  std::vector<double> ok{1.0};
  CHECK_THROWS_AS(ks_exponential(ok, 0.0), std::domain_error);
}

TEST_CASE("mean_ci on tiny samples") {
  std::vector<double> constant(10, 3.5);
  const auto c = mean_ci(constant, 0.95);
  CHECK(c.mean == doctest::Approx(3.5));
  CHECK(c.half_width == doctest::Approx(0.0));

  std::vector<double> two{0.0, 2.0};
  const auto t = mean_ci(two, 0.95);
  CHECK(t.mean == doctest::Approx(1.0));
  CHECK(t.half_width == doctest::Approx(1.959964).epsilon(1e-5));

  CHECK_THROWS_AS(mean_ci(two, 0.0), std::domain_error);
  CHECK_THROWS_AS(mean_ci(two, 1.0), std::domain_error);
  CHECK_THROWS_AS(mean_ci({}, 0.5), std::domain_error);
}

TEST_CASE("mean_ci coverage calibrates to the nominal level") {
  int covered = 0;
  const int data_sets = 500;
  for (int t = 0; t < data_sets; ++t) {
    RngStream rng(9000 + static_cast<std::uint64_t>(t));
    std::vector<double> samples(400);
    for (auto& x : samples) x = rng.next_exponential(2.0);  // true mean 0.5
    const auto ci = mean_ci(samples, 0.95);
    if (std::abs(ci.mean - 0.5) <= ci.half_width) ++covered;
  }
  const double coverage = static_cast<double>(covered) / data_sets;
  CHECK(coverage > 0.93);
  CHECK(coverage < 0.97);
}

TEST_CASE("loglog slope recovers exact power laws") {
  std::vector<std::pair<double, double>> cube, sqrt_pts;
  for (const double x : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3}) {
    cube.push_back({x, std::cbrt(x)});
    sqrt_pts.push_back({x, 2.7 * std::sqrt(x)});
  }
  CHECK(loglog_slope(cube) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(loglog_slope(sqrt_pts) == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<std::pair<double, double>> one{{1.0, 1.0}};
  CHECK_THROWS_AS(loglog_slope(one), std::domain_error);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232).epsilon(1e-5));
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
}
