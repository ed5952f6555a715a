#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spmoran/detail/parallel.hpp"
#include "spmoran/engine.hpp"
#include "spmoran/errors.hpp"

namespace spmoran {

namespace {

constexpr std::uint64_t kNuBlock = 1024;
constexpr std::uint64_t kTauBlock = 16;
constexpr std::uint64_t kBoundaryBlock = 256;
constexpr std::uint64_t kBetaBlock = 4096;
constexpr std::uint64_t kDefaultTauBudget = 1'000'000'000;

}  // namespace

Tau2Sample run_tau2(const SimParams& params, RngStream& rng, std::uint64_t max_events) {
  if (!params.geometry.is_torus()) throw std::invalid_argument("run_tau2: geometry must be a torus");
  if (!(params.u1 > 0.0)) throw std::invalid_argument("run_tau2: u1 must be positive");
  if (!(params.u2 > 0.0)) throw std::invalid_argument("run_tau2: u2 must be positive");
  const std::uint64_t budget = max_events == 0 ? kDefaultTauBudget : max_events;
  TorusSim sim(params);
  while (true) {
    const Event ev = sim.step(rng);
    if (ev.kind == EventKind::Mutate12) {
      Tau2Sample s;
      s.tau2 = sim.time();
      s.rho2 = sim.lineage_origin_time(ev.site);
      s.n_families = sim.families_started();
      s.first_family_time = sim.first_family_time();
      return s;
    }
    if (ev.kind == EventKind::Absorbed)
      throw InternalError("run_tau2: absorbed state despite positive mutation rates");
    if (sim.events() > budget) {
      std::ostringstream msg;
      msg << "run_tau2: event budget " << budget << " exhausted at t=" << sim.time()
          << " with " << sim.type1_count() << " type-1 cells and " << sim.families_started()
          << " families started";
      throw CapExhaustedError(msg.str());
    }
  }
}

std::vector<Tau2Sample> tau2_batch(const SimParams& params, std::uint64_t reps, int threads,
                                   std::uint64_t max_events) {
  if (reps == 0) throw std::domain_error("tau2_batch: reps must be >= 1");
  const std::uint64_t n_blocks = (reps + kTauBlock - 1) / kTauBlock;
  auto blocks = detail::run_blocks<std::vector<Tau2Sample>>(n_blocks, threads, [&](std::uint64_t b) {
    std::vector<Tau2Sample> out;
    const std::uint64_t lo = b * kTauBlock;
    const std::uint64_t hi = std::min(reps, lo + kTauBlock);
    out.reserve(hi - lo);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng(params.seed, rep);
      out.push_back(run_tau2(params, rng, max_events));
    }
    return out;
  });
  std::vector<Tau2Sample> all;
  all.reserve(reps);
  for (auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
  return all;
}

NuEstimate estimate_nu(const SimParams& params, std::uint64_t reps, int threads,
                       double manhour_log_cap, std::uint64_t size_cap) {
  if (reps == 0) throw std::domain_error("estimate_nu: reps must be >= 1");
  if (!(manhour_log_cap > 0.0)) throw std::domain_error("estimate_nu: manhour_log_cap must be positive");
  params.validate();
  if (params.geometry.is_torus())
    throw std::invalid_argument("estimate_nu: single-family estimates run on the unbounded lattice");

  NuEstimate est;
  est.reps = reps;
  if (params.u2 == 0.0) return est;  // every family contributes exactly 0

  // Families run with the type-2 channel disabled: u2 enters only through
  // the smoothed estimator 1 - exp(-u2 W), truncated once u2 W > cap.
  SimParams run_params = params;
  run_params.u2 = 0.0;
  FamilyCaps caps;
  caps.man_hours_cap = manhour_log_cap / params.u2;
  caps.size_cap = size_cap;

  struct Block {
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t capped = 0;
  };
  const std::uint64_t n_blocks = (reps + kNuBlock - 1) / kNuBlock;
  auto blocks = detail::run_blocks<Block>(n_blocks, threads, [&](std::uint64_t b) {
    Block out;
    const std::uint64_t lo = b * kNuBlock;
    const std::uint64_t hi = std::min(reps, lo + kNuBlock);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng(params.seed, rep);
      const FamilyOutcome fam = run_family(run_params, caps, rng);
      if (fam.fate != FamilyFate::Extinct) ++out.capped;
      const double v = -std::expm1(-params.u2 * fam.man_hours);
      out.sum += v;
      out.sum_sq += v * v;
    }
    return out;
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const Block& b : blocks) {
    sum += b.sum;
    sum_sq += b.sum_sq;
    est.capped_families += b.capped;
  }
  const auto n = static_cast<double>(reps);
  est.nu_hat = sum / n;
  if (reps > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.nu_hat * est.nu_hat) / (n - 1.0));
    est.stderr_ = std::sqrt(var / n);
  }
  return est;
}

std::vector<BoundaryRow> boundary_profile(const SimParams& params, std::span<const std::uint64_t> levels,
                                          std::uint64_t reps, int threads) {
  params.validate();
  if (params.geometry.is_torus())
    throw std::invalid_argument("boundary_profile: runs on the unbounded lattice");
  if (params.lambda != 1.0 || params.u2 != 0.0)
    throw std::invalid_argument("boundary_profile: defined for the neutral voter model (lambda=1, u2=0)");
  if (levels.empty()) throw std::domain_error("boundary_profile: need at least one level");
  if (reps == 0) throw std::domain_error("boundary_profile: reps must be >= 1");

  std::vector<std::uint64_t> lv(levels.begin(), levels.end());
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  if (lv.front() < 1) throw std::domain_error("boundary_profile: levels must be >= 1");
  const std::uint64_t top = lv.back();

  FamilyCaps caps;
  caps.size_cap = top;  // stop as soon as the top level is recorded
  caps.hit_levels = lv;

  struct Block {
    std::vector<std::uint64_t> count;
    std::vector<double> sum, sum_sq;
  };
  auto run_block = [&](std::uint64_t b) {
    Block out;
    out.count.assign(lv.size(), 0);
    out.sum.assign(lv.size(), 0.0);
    out.sum_sq.assign(lv.size(), 0.0);
    const std::uint64_t lo = b * kBoundaryBlock;
    for (std::uint64_t launch = lo; launch < lo + kBoundaryBlock; ++launch) {
      RngStream rng(params.seed, launch);
      const FamilyOutcome fam = run_family(params, caps, rng);
      for (const auto& [level, rec] : fam.first_hit) {
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(lv.begin(), lv.end(), level) - lv.begin());
        const auto pairs = static_cast<double>(rec.boundary_pairs);
        out.count[idx] += 1;
        out.sum[idx] += pairs;
        out.sum_sq[idx] += pairs * pairs;
      }
    }
    return out;
  };

  // Launch waves of blocks until, in block-index order, at least `reps`
  // families have reached the top level. Only the deterministic prefix of
  // blocks contributes, so results do not depend on the thread count.
  std::vector<Block> done;
  std::uint64_t top_so_far = 0;
  std::size_t prefix = 0;
  const std::uint64_t wave = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(threads) * 2);
  while (top_so_far < reps) {
    const std::uint64_t first = done.size();
    auto batch = detail::run_blocks<Block>(wave, threads,
                                           [&](std::uint64_t i) { return run_block(first + i); });
    for (auto& blk : batch) done.push_back(std::move(blk));
    top_so_far = 0;
    prefix = 0;
    for (const Block& blk : done) {
      top_so_far += blk.count[lv.size() - 1];
      ++prefix;
      if (top_so_far >= reps) break;
    }
    if (top_so_far >= reps) break;
  }

  std::vector<BoundaryRow> rows(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) {
    std::uint64_t n = 0;
    double s = 0.0, ss = 0.0;
    for (std::size_t b = 0; b < prefix; ++b) {
      n += done[b].count[i];
      s += done[b].sum[i];
      ss += done[b].sum_sq[i];
    }
    rows[i].level = lv[i];
    rows[i].samples = n;
    if (n > 0) {
      rows[i].mean_pairs = s / static_cast<double>(n);
      if (n > 1) {
        const double var =
            std::max(0.0, (ss - static_cast<double>(n) * rows[i].mean_pairs * rows[i].mean_pairs) /
                              (static_cast<double>(n) - 1.0));
        rows[i].stderr_ = std::sqrt(var / static_cast<double>(n));
      }
    }
  }
  return rows;
}

BetaEstimate estimate_beta(int d, std::uint64_t walk_steps, std::uint64_t reps, std::uint64_t seed,
                           int threads) {
  if (d != 3) throw std::invalid_argument("estimate_beta: defined for d = 3");
  if (reps == 0) throw std::domain_error("estimate_beta: reps must be >= 1");
  if (walk_steps == 0) throw std::domain_error("estimate_beta: walk_steps must be >= 1");

  struct Block {
    std::uint64_t absorbed = 0;
    double inv_r = 0.0, inv_r2 = 0.0;  // over survivors
  };
  const std::uint64_t n_blocks = (reps + kBetaBlock - 1) / kBetaBlock;
  auto blocks = detail::run_blocks<Block>(n_blocks, threads, [&](std::uint64_t b) {
    Block out;
    const std::uint64_t lo = b * kBetaBlock;
    const std::uint64_t hi = std::min(reps, lo + kBetaBlock);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng(seed, rep);
      std::int64_t x = 1, y = 0, z = 0;
      bool absorbed = false;
      for (std::uint64_t s = 0; s < walk_steps; ++s) {
        const auto dir = static_cast<int>(rng.next_below(6));
        const std::int64_t delta = (dir & 1) ? 1 : -1;
        if (dir < 2)
          x += delta;
        else if (dir < 4)
          y += delta;
        else
          z += delta;
        if (x == 0 && y == 0 && z == 0) {
          absorbed = true;
          break;
        }
      }
      if (absorbed) {
        ++out.absorbed;
      } else {
        const double r = std::sqrt(static_cast<double>(x * x + y * y + z * z));
        out.inv_r += 1.0 / r;
        out.inv_r2 += 1.0 / (r * r);
      }
    }
    return out;
  });

  std::uint64_t absorbed = 0;
  double s1 = 0.0, s2 = 0.0;
  for (const Block& b : blocks) {
    absorbed += b.absorbed;
    s1 += b.inv_r;
    s2 += b.inv_r2;
  }
  const auto n = static_cast<double>(reps);
  const double survived = n - static_cast<double>(absorbed);
  // Survivors at x still get absorbed later with probability
  // G(x)/G(0) ~ (3/(2 pi |x|)) beta (local CLT tail of the Green function,
  // G(0) = 1/beta). Solving beta = (1 - A) - kappa beta E[1/|x|; alive]:
  const double kappa = 3.0 / (2.0 * M_PI);
  BetaEstimate est;
  est.reps = reps;
  est.absorbed = absorbed;
  est.beta = (survived / n) / (1.0 + kappa * s1 / n);
  // per-walk statistic w = 1{alive} (1 - kappa beta / |x|); beta = mean(w)
  const double mean_w2 =
      (survived - 2.0 * kappa * est.beta * s1 + kappa * kappa * est.beta * est.beta * s2) / n;
  const double var = std::max(0.0, mean_w2 - est.beta * est.beta);
  est.stderr_ = std::sqrt(var / n);
  return est;
}

}  // namespace spmoran
