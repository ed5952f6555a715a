#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spmoran/analytic.hpp"
#include "spmoran/diffusion.hpp"
#include "spmoran/rng.hpp"

using namespace spmoran;

namespace {

DiffusionParams params(int d, double eps, double beta = 0.0, double c = 1.0) {
  DiffusionParams p;
  p.d = d;
  p.beta = beta;
  p.eps = eps;
  p.kill_rate_scale = c;
  return p;
}

}  // namespace

TEST_CASE("eps = 0 is absorbed immediately") {
  RngStream rng(1);
  const auto r = simulate_path(params(1, 0.0), rng);
  CHECK(r.end == PathEnd::Absorbed);
  CHECK(r.t_end == 0.0);
  CHECK(r.integral == 0.0);
}

TEST_CASE("martingale property: E[Y_{t ^ T0}] = eps for d >= 2") {
  for (int d = 2; d <= 3; ++d) {
    const double beta = d == 2 ? M_PI : 0.66;
    const double eps = 0.1;
    PathOptions opt;
    opt.probe_time = 0.5;
    double sum = 0.0, sumsq = 0.0;
    const int reps = 100'000;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(100 + static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(rep));
      const auto r = simulate_path(params(d, eps, beta), rng, opt);
      sum += r.y_probe;
      sumsq += r.y_probe * r.y_probe;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - eps) < 3.0 * se);
  }
}

TEST_CASE("d=1 capped hitting time matches a rescaled random-walk oracle") {
  // Independent oracle: simple random walk with step delta and time step
  // delta^2/2 has the same variance clock as dY = sqrt(2) dB.
  const double horizon = 20.0;
  const double eps = 1.0;
  double oracle_sum = 0.0;
  const int oracle_reps = 40'000;
  for (int rep = 0; rep < oracle_reps; ++rep) {
    RngStream rng(555, static_cast<std::uint64_t>(rep));
    const double delta = 0.05;
    const double dt = delta * delta / 2.0;
    double y = eps, t = 0.0;
    while (y > 0.0 && t < horizon) {
      y += (rng.next_below(2) == 0) ? delta : -delta;
      t += dt;
    }
    oracle_sum += std::min(t, horizon);
  }
  const double oracle = oracle_sum / oracle_reps;

  DiffusionParams p = params(1, eps);
  p.horizon = horizon;
  double sum = 0.0;
  const int reps = 40'000;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(556, static_cast<std::uint64_t>(rep));
    const auto r = simulate_path(p, rng);
    sum += std::min(r.t_end, horizon);
  }
  const double mean = sum / reps;
  CHECK(std::abs(mean - oracle) / oracle < 0.05);
}

TEST_CASE("barrier hitting probability is eps/b (d >= 2)") {
  const double eps = 0.05, b = 1.0;
  PathOptions opt;
  opt.barrier = b;
  int hit = 0;
  const int reps = 60'000;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(600, static_cast<std::uint64_t>(rep));
    const auto r = simulate_path(params(2, eps, M_PI), rng, opt);
    if (r.end == PathEnd::BarrierHit) ++hit;
  }
  const double phat = static_cast<double>(hit) / reps;
  const double expect = eps / b;
  const double sd = std::sqrt(expect * (1.0 - expect) / reps);
  CHECK(std::abs(phat - expect) < 3.5 * sd);
}

TEST_CASE("F(eps)/eps lands on gamma_d") {
  // d=1: target gamma_1 = 0.72901 (band [0.69, 0.77])
  {
    const auto f = estimate_F_eps(params(1, 0.01), 200'000, 42, 2);
    const double ratio = f.value / 0.01;
    CHECK(ratio > 0.69);
    CHECK(ratio < 0.77);
  }
  // d=2 with beta = pi: target 1/sqrt(pi) = 0.5642 (band [0.53, 0.60])
  {
    const auto f = estimate_F_eps(params(2, 0.01, M_PI), 200'000, 43, 2);
    const double ratio = f.value / 0.01;
    CHECK(ratio > 0.53);
    CHECK(ratio < 0.60);
  }
}

TEST_CASE("dt refinement changes F by less than the Monte Carlo error") {
  DiffusionParams coarse = params(1, 0.02);
  DiffusionParams fine = coarse;
  fine.dt = 0.02 * 1e-3 / 2.0;
  const auto a = estimate_F_eps(coarse, 120'000, 7, 2);
  const auto b = estimate_F_eps(fine, 120'000, 8, 2);
  CHECK(std::abs(a.value - b.value) < 2.5 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_));
}

TEST_CASE("large eps saturates F") {
  const auto pred = nu_epsilon_prediction(1, 1e-6, 5.0, 20'000, 9, 2);
  // F -> 1, so the prediction collapses to 1/(n eps)
  CHECK(pred.value == doctest::Approx(1.0 / (pred.n_scale * 5.0)).epsilon(0.02));
}

TEST_CASE("nu_eps prediction approaches gamma_d h_d as eps -> 0") {
  const double target = gamma_d(1) * h_d(1, 1e-6);
  double prev_gap = 1e9;
  for (const double eps : {0.5, 0.1, 0.02}) {
    const auto pred = nu_epsilon_prediction(1, 1e-6, eps, 150'000, 11, 2);
    const double gap = std::abs(pred.value / target - 1.0);
    CHECK(gap < prev_gap + 0.02);
    prev_gap = gap;
  }
  const auto fine = nu_epsilon_prediction(1, 1e-6, 0.02, 150'000, 11, 2);
  CHECK(fine.value / target == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("BVP solve reproduces gamma_1 to four significant digits") {
  const double g = solve_airy_bvp();
  CHECK(g == doctest::Approx(0.7290111).epsilon(5e-5));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(2, 0.1).validate(), std::invalid_argument);  // missing beta
  CHECK_THROWS_AS(params(0, 0.1).validate(), std::invalid_argument);
  DiffusionParams p = params(1, -0.1);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(estimate_F_eps(params(1, 0.1), 0, 1, 1), std::domain_error);
}
