#include "spmoran/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spmoran/analytic.hpp"
#include "spmoran/detail/parallel.hpp"
#include "spmoran/errors.hpp"

namespace spmoran {

namespace {

constexpr std::uint64_t kPathBlock = 4096;
constexpr double kIntegralLogCap = 20.0;
constexpr int kMaxDoublings = 9;  // dt grows up to 512x away from the boundary

}  // namespace

void DiffusionParams::validate() const {
  if (d < 1 || d > 3) throw std::invalid_argument("DiffusionParams: d must be 1, 2 or 3");
  if (d >= 2 && !(beta > 0.0)) throw std::invalid_argument("DiffusionParams: beta must be positive for d >= 2");
  if (!(eps >= 0.0)) throw std::invalid_argument("DiffusionParams: eps must be >= 0");
  if (dt < 0.0) throw std::invalid_argument("DiffusionParams: dt must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("DiffusionParams: horizon must be positive");
  if (!(kill_rate_scale >= 0.0)) throw std::invalid_argument("DiffusionParams: kill_rate_scale must be >= 0");
}

PathResult simulate_path(const DiffusionParams& p, RngStream& rng, const PathOptions& opt) {
  p.validate();
  PathResult res;
  if (p.eps == 0.0) return res;  // absorbed immediately: (0, 0)

  const double dt0 = p.dt > 0.0 ? p.dt : p.eps * 1e-3;
  const double c = p.kill_rate_scale;
  const bool want_probe = opt.probe_time >= 0.0;
  double y = p.eps;
  double t = 0.0;
  double integral = 0.0;
  bool probed = false;

  while (true) {
    if (want_probe && !probed && t >= opt.probe_time) {
      res.y_probe = y;
      probed = true;
    }
    // step doubling: dt0 near the boundary, dt0 * 2^k at y ~ eps * 2^k
    double dtl = dt0;
    for (int k = 0; k < kMaxDoublings && y >= p.eps * static_cast<double>(2 << k); ++k) dtl *= 2.0;
    const double sigma2 = p.d == 1 ? 2.0 : 2.0 * p.beta * y;
    const double y_new = y + std::sqrt(sigma2 * dtl) * rng.next_normal();

    if (y_new <= 0.0) {
      const double frac = y / (y - y_new);  // linear crossing estimate
      res.t_end = t + dtl * frac;
      res.integral = integral + 0.5 * y * dtl * frac;
      res.end = PathEnd::Absorbed;
      if (want_probe && !probed) res.y_probe = opt.probe_time < res.t_end ? y : 0.0;
      return res;
    }
    // Brownian-bridge probability of an unseen excursion below 0
    const double sigma2_bridge = p.d == 1 ? 2.0 : p.beta * (y + y_new);
    const double p_cross = std::exp(-2.0 * y * y_new / (sigma2_bridge * dtl));
    if (rng.next_double() < p_cross) {
      res.t_end = t + 0.5 * dtl;
      res.integral = integral + 0.25 * (y + y_new) * dtl;
      res.end = PathEnd::Absorbed;
      if (want_probe && !probed) res.y_probe = opt.probe_time < res.t_end ? y : 0.0;
      return res;
    }

    integral += 0.5 * (y + y_new) * dtl;
    t += dtl;
    y = y_new;

    if (y >= opt.barrier) {
      res.end = PathEnd::BarrierHit;
      break;
    }
    if (c * integral > opt.integral_log_cap) {
      res.end = PathEnd::IntegralCapHit;
      break;
    }
    if (t >= p.horizon) {
      res.end = PathEnd::HorizonHit;
      break;
    }
  }
  res.t_end = t;
  res.integral = integral;
  if (want_probe && !probed) res.y_probe = y;
  return res;
}

FEpsEstimate estimate_F_eps(const DiffusionParams& p, std::uint64_t reps, std::uint64_t seed,
                            int threads) {
  p.validate();
  if (reps == 0) throw std::domain_error("estimate_F_eps: reps must be >= 1");
  struct Block {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t horizon_hits = 0;
  };
  PathOptions opt;
  opt.integral_log_cap = kIntegralLogCap;
  const std::uint64_t n_blocks = (reps + kPathBlock - 1) / kPathBlock;
  auto blocks = detail::run_blocks<Block>(n_blocks, threads, [&](std::uint64_t b) {
    Block out;
    const std::uint64_t lo = b * kPathBlock;
    const std::uint64_t hi = std::min(reps, lo + kPathBlock);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng(seed, rep);
      const PathResult path = simulate_path(p, rng, opt);
      if (path.end == PathEnd::HorizonHit) ++out.horizon_hits;
      const double v = -std::expm1(-p.kill_rate_scale * path.integral);
      out.sum += v;
      out.sum_sq += v * v;
    }
    return out;
  });
  FEpsEstimate est;
  est.reps = reps;
  double sum = 0.0, sum_sq = 0.0;
  for (const Block& b : blocks) {
    sum += b.sum;
    sum_sq += b.sum_sq;
    est.horizon_hits += b.horizon_hits;
  }
  const auto n = static_cast<double>(reps);
  est.value = sum / n;
  if (reps > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.value * est.value) / (n - 1.0));
    est.stderr_ = std::sqrt(var / n);
  }
  return est;
}

NuEpsPrediction nu_epsilon_prediction(int d, double u2, double eps, std::uint64_t reps,
                                      std::uint64_t seed, int threads, double beta, double dt) {
  if (!(eps > 0.0)) throw std::domain_error("nu_epsilon_prediction: eps must be positive");
  NuEpsPrediction out;
  out.n_scale = 1.0 / h_d(d, u2);
  out.c = out.n_scale * a_n(d, out.n_scale) * u2;  // -> 1 as u2 -> 0 by construction
  DiffusionParams p;
  p.d = d;
  p.beta = beta;
  p.eps = eps;
  p.dt = dt;
  p.kill_rate_scale = out.c;
  out.f = estimate_F_eps(p, reps, seed, threads);
  out.value = out.f.value / (out.n_scale * eps);
  out.stderr_ = out.f.stderr_ / (out.n_scale * eps);
  return out;
}

double solve_airy_bvp(double x_max, int n_grid) {
  if (!(x_max > 0.0) || x_max > 40.0) throw std::domain_error("solve_airy_bvp: x_max must lie in (0, 40]");
  if (n_grid < 16) throw std::domain_error("solve_airy_bvp: grid too coarse");
  const double h = x_max / n_grid;
  const double v_right = airy_ai(x_max) / kAiryAi0;
  // v_{i-1} - (2 + h^2 x_i) v_i + v_{i+1} = 0 on the interior, Thomas solve.
  const int n = n_grid - 1;
  std::vector<double> diag(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i <= n; ++i) {
    const double x_i = h * static_cast<double>(i);
    diag[static_cast<std::size_t>(i - 1)] = -(2.0 + h * h * x_i);
  }
  rhs[0] = -1.0;                                  // v(0) = 1
  rhs[static_cast<std::size_t>(n - 1)] -= v_right;  // v(x_max)
  std::vector<double> cprime(static_cast<std::size_t>(n));
  cprime[0] = 1.0 / diag[0];
  rhs[0] = rhs[0] / diag[0];
  for (int i = 1; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double m = 1.0 / (diag[s] - cprime[s - 1]);
    cprime[s] = m;
    rhs[s] = (rhs[s] - rhs[s - 1]) * m;
  }
  std::vector<double> v(static_cast<std::size_t>(n));
  v[static_cast<std::size_t>(n - 1)] = rhs[static_cast<std::size_t>(n - 1)];
  for (int i = n - 2; i >= 0; --i) {
    const auto s = static_cast<std::size_t>(i);
    v[s] = rhs[s] - cprime[s] * v[s + 1];
  }
  // one-sided second-order derivative at 0 with v(0) = 1
  return (3.0 * 1.0 - 4.0 * v[0] + v[1]) / (2.0 * h);
}

}  // namespace spmoran
