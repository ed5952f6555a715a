#pragma once

#include <cstdint>
#include <limits>

#include "spmoran/rng.hpp"

namespace spmoran {

/// Parameters of the size-limit diffusion dY = sqrt(2) dB (d=1) or
/// dY = sqrt(2 beta_d Y) dB (d>=2), absorbed at 0, started at Y_0 = eps.
struct DiffusionParams {
  int d = 1;
  double beta = 0.0;             // required for d >= 2
  double eps = 0.01;             // Y_0
  double dt = 0.0;               // base step near the boundary; 0 = eps * 1e-3
  double kill_rate_scale = 1.0;  // c in F = 1 - E exp(-c int Y ds)
  double horizon = 1e4;          // max simulated time per path

  void validate() const;
};

enum class PathEnd { Absorbed, HorizonHit, IntegralCapHit, BarrierHit };

struct PathResult {
  PathEnd end = PathEnd::Absorbed;
  double t_end = 0.0;     // hitting time of 0 when Absorbed
  double integral = 0.0;  // int Y ds up to t_end (trapezoidal)
  double y_probe = std::numeric_limits<double>::quiet_NaN();  // Y(probe_time ^ T0)
};

struct PathOptions {
  double integral_log_cap = std::numeric_limits<double>::infinity();  // stop once c*I exceeds this
  double barrier = std::numeric_limits<double>::infinity();           // stop once Y >= barrier
  double probe_time = -1.0;  // < 0: no probe
};

/// One Euler-Maruyama path with step doubling away from the boundary and a
/// Brownian-bridge crossing test between grid points (plain clamping biases
/// the absorption time by O(sqrt(dt)), far beyond the tolerances here).
PathResult simulate_path(const DiffusionParams& p, RngStream& rng, const PathOptions& opt = {});

/// Monte Carlo estimate of F(eps) = 1 - E_eps exp(-c int_0^{T0} Y ds).
/// Paths stop once c*I > 20 (error < e^-20 each); replica r draws from
/// RngStream(seed, r) and results merge deterministically.
struct FEpsEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t horizon_hits = 0;
};
FEpsEstimate estimate_F_eps(const DiffusionParams& p, std::uint64_t reps, std::uint64_t seed,
                            int threads);

/// The truncated tunneling probability via the diffusion limit:
/// nu_d^eps ~ (1/(n eps)) [1 - E_eps exp(-n a_n u2 int Y ds)] with
/// n = 1/h_d(u2). `value` carries the full prediction; f is the underlying
/// F(eps) estimate with c = n a_n u2.
struct NuEpsPrediction {
  double value = 0.0;
  double stderr_ = 0.0;
  double n_scale = 0.0;
  double c = 0.0;
  FEpsEstimate f;
};
NuEpsPrediction nu_epsilon_prediction(int d, double u2, double eps, std::uint64_t reps,
                                      std::uint64_t seed, int threads, double beta = 0.0,
                                      double dt = 0.0);

/// Finite-difference solve of v'' = x v on [0, x_max] with v(0) = 1 and
/// v(x_max) = Ai(x_max)/Ai(0); returns -v'(0), an independent route to
/// gamma_1. Second-order accurate in x_max/n_grid.
double solve_airy_bvp(double x_max = 12.0, int n_grid = 24000);

}  // namespace spmoran
