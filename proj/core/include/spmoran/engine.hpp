#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spmoran/detail/flat_map.hpp"
#include "spmoran/lattice.hpp"
#include "spmoran/rng.hpp"

namespace spmoran {

/// BiasedVoter: type-1 cells give birth at rate lambda onto a uniform
/// neighbor, type-0 cells at rate 1; per flip this carries the 1/(2d)
/// neighbor-choice factor, so in d=1 the neutral family-size process jumps
/// at total rate 2. Komarova: every site with a discordant neighbor fires at
/// rate 1 and resamples its type in proportion to neighborhood fitness;
/// resamples that keep the type are explicit no-op events.
enum class Dynamics { BiasedVoter, Komarova };

struct SimParams {
  Geometry geometry = Geometry::unbounded(1);
  double lambda = 1.0;
  double u1 = 0.0;  // mutation rate 0 -> 1, per cell per unit time
  double u2 = 0.0;  // mutation rate 1 -> 2
  Dynamics dynamics = Dynamics::BiasedVoter;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

/// Aggregate channel rates at the current state. BiasedVoter fills
/// flip_up/flip_down; Komarova folds both into the resample channel.
struct EventRates {
  double flip_up = 0.0;
  double flip_down = 0.0;
  double resample = 0.0;
  double mutate01 = 0.0;
  double mutate12 = 0.0;
  double total() const { return flip_up + flip_down + resample + mutate01 + mutate12; }
};

enum class EventKind {
  FlipUp,        // a type-0 site became type 1
  FlipDown,      // a type-1 site became type 0
  ResampleNoop,  // Komarova resample that kept the type
  Mutate01,      // a new type-1 family seeded by mutation
  Mutate12,      // first type-2 mutation; simulation goal reached
  Absorbed,      // no enabled transition and no mutation channel
};

struct Event {
  EventKind kind = EventKind::Absorbed;
  double dt = 0.0;  // holding time that elapsed before the event
  Site site{};      // site whose state changed (meaningless for Absorbed)
};

// ---------------------------------------------------------------------------
// Single-family mode: one type-1 family on the unbounded lattice (u1 = 0).

enum class FamilyFate { Extinct, Type2Born, SizeCapHit, ManHourCapHit };

/// State recorded the first time the family size reaches a requested level.
struct LevelRecord {
  double time = 0.0;
  double man_hours = 0.0;
  std::uint64_t boundary_pairs = 0;
};

struct FamilyOutcome {
  FamilyFate fate = FamilyFate::Extinct;
  double man_hours = 0.0;  // W = int |xi_s| ds, accumulated exactly per holding time
  std::uint64_t max_size = 1;
  double t_end = 0.0;
  std::uint64_t up_jumps = 0;
  std::uint64_t down_jumps = 0;
  std::vector<std::pair<std::uint64_t, LevelRecord>> first_hit;  // requested levels, ascending
};

struct FamilyCaps {
  double man_hours_cap = std::numeric_limits<double>::infinity();
  std::uint64_t size_cap = 10'000'000;
  std::vector<std::uint64_t> hit_levels{};  // levels to record T_k at
};

/// Event-driven state of a single family. Owns no RNG; step() draws from the
/// caller's stream, so replicas parallelize with independent streams.
class FamilySim {
 public:
  explicit FamilySim(const SimParams& params);

  Event step(RngStream& rng);
  EventRates rates() const;

  std::uint64_t size() const { return occupied_.size(); }
  std::uint64_t boundary_pairs() const { return pairs_.size(); }
  double time() const { return time_; }
  double man_hours() const { return man_hours_; }
  std::uint64_t events() const { return events_; }
  const SimParams& params() const { return params_; }

  std::vector<Site> occupied_sites() const { return occupied_; }

  /// Rebuild the discordant-pair index (and Komarova bookkeeping) from the
  /// occupied set and compare with the incremental state; throws
  /// InternalError on any mismatch. Called automatically every
  /// `debug_check_interval` events when nonzero.
  void check_consistency() const;
  void set_debug_check_interval(std::uint64_t every) { debug_check_every_ = every; }

 private:
  struct Cell {
    std::uint8_t occupied = 0;
    std::int32_t occ_slot = -1;
    std::int32_t active_slot = -1;
    std::int32_t discordant = 0;  // # neighbors of opposite type (Komarova only)
    std::array<std::int32_t, 6> pair_slot{-1, -1, -1, -1, -1, -1};
  };
  struct PairRef {
    Site from{};  // type-1 end; the type-0 end is neighbor(from, dir)
    std::uint8_t dir = 0;
  };

  void occupy(const Site& y);
  void release(const Site& x);
  void add_pair(const Site& from, Cell& owner, int dir);
  void remove_pair(Cell& owner, int dir);
  void sync_active(const Site& s, Cell& cell);
  void update_komarova_counts(const Site& flipped, bool now_occupied);
  Site pick_type1_neighbor(const Site& s, RngStream& rng) const;

  SimParams params_;
  Geometry geom_;
  int two_d_;
  double inv_two_d_;
  bool komarova_;
  detail::FlatSiteMap<Cell> cells_;
  std::vector<PairRef> pairs_;
  std::vector<Site> occupied_;
  std::vector<SiteKey> active_;  // Komarova: sites with a discordant neighbor
  double time_ = 0.0;
  double man_hours_ = 0.0;
  std::uint64_t events_ = 0;
  std::uint64_t debug_check_every_ = 0;
};

/// Runs one family from a single type-1 cell at the origin to extinction,
/// first type-2 mutation, or a cap. Caps are reported in the fate, never
/// silently applied.
FamilyOutcome run_family(const SimParams& params, const FamilyCaps& caps, RngStream& rng);

/// Smoothed estimator of the tunneling probability nu_d: the mean over
/// families of 1 - exp(-u2 W), with each family truncated once u2 W exceeds
/// manhour_log_cap (the capped contribution differs from 1 by < e^-20 at the
/// default). Families run without the type-2 mutation channel; u2 enters
/// only through the estimator. Replica r uses RngStream(seed, r).
struct NuEstimate {
  double nu_hat = 0.0;
  double stderr_ = 0.0;
  std::uint64_t capped_families = 0;
  std::uint64_t reps = 0;
};
NuEstimate estimate_nu(const SimParams& params, std::uint64_t reps, int threads,
                       double manhour_log_cap = 20.0, std::uint64_t size_cap = 10'000'000);

/// Mean discordant-pair count at the first hitting time of each level,
/// averaged over neutral families that reach it. Families are launched until
/// at least `reps` of them reach the highest requested level; the launch
/// schedule is deterministic and independent of the thread count.
struct BoundaryRow {
  std::uint64_t level = 0;
  double mean_pairs = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
};
std::vector<BoundaryRow> boundary_profile(const SimParams& params, std::span<const std::uint64_t> levels,
                                          std::uint64_t reps, int threads);

/// Monte Carlo estimate of beta_3, the probability that two simple random
/// walks started at 0 and e1 never meet: the difference walk is a simple
/// random walk absorbed at the origin. Walks still alive after walk_steps
/// contribute through the transient-tail correction
/// P_x(hit 0) ~ (3/(2 pi |x|)) beta_3, solved self-consistently.
struct BetaEstimate {
  double beta = 0.0;
  double stderr_ = 0.0;
  std::uint64_t reps = 0;
  std::uint64_t absorbed = 0;
};
BetaEstimate estimate_beta(int d, std::uint64_t walk_steps, std::uint64_t reps, std::uint64_t seed,
                           int threads);

// ---------------------------------------------------------------------------
// Full-torus mode: wait for the first type-2 mutation.

struct Tau2Sample {
  double tau2 = 0.0;  // time of the first 1 -> 2 mutation event
  double rho2 = 0.0;  // origin time of the lineage label at the mutating cell
  std::uint64_t n_families = 0;  // 0 -> 1 mutation events up to tau2
  double first_family_time = 0.0;  // time of the first 0 -> 1 mutation
};

/// Dense-array torus simulation with per-cell lineage labels. While no
/// type-1 cell is alive the next 0 -> 1 mutation is sampled directly from
/// its exponential(u1 N) law (quiescent skip).
class TorusSim {
 public:
  explicit TorusSim(const SimParams& params);

  Event step(RngStream& rng);
  EventRates rates() const;

  std::uint64_t type1_count() const { return occupied_.size(); }
  std::uint64_t site_count() const { return n_sites_; }
  double time() const { return time_; }
  std::uint64_t events() const { return events_; }
  std::uint64_t families_started() const { return families_started_; }
  double first_family_time() const { return first_family_time_; }

  double lineage_origin_time(const Site& s) const;
  std::uint64_t lineage_family(const Site& s) const;

  void check_consistency() const;
  void set_debug_check_interval(std::uint64_t every) { debug_check_every_ = every; }

 private:
  void occupy(std::uint32_t cell, std::uint64_t family, double origin);
  void release(std::uint32_t cell);
  void add_pair(std::uint32_t cell, int dir);
  void remove_pair(std::uint32_t cell, int dir);
  void sync_active(std::uint32_t cell);
  std::uint32_t neighbor_cell(std::uint32_t cell, int dir) const { return nbr_[cell * two_d_ + dir]; }
  std::uint32_t pick_type0_cell(RngStream& rng) const;

  SimParams params_;
  Geometry geom_;
  int two_d_;
  double inv_two_d_;
  bool komarova_;
  std::uint64_t n_sites_;
  std::vector<std::uint32_t> nbr_;        // n_sites * 2d neighbor table
  std::vector<std::uint8_t> type_;
  std::vector<std::uint64_t> family_;
  std::vector<double> origin_;
  std::vector<std::uint32_t> pairs_;      // packed cell * 2d + dir, type-1 end first
  std::vector<std::int32_t> pair_slot_;   // n_sites * 2d
  std::vector<std::uint32_t> occupied_;
  std::vector<std::int32_t> occ_slot_;
  std::vector<std::uint32_t> active_;     // Komarova
  std::vector<std::int32_t> active_slot_;
  std::vector<std::uint8_t> discordant_;  // Komarova: per-cell opposite-type neighbor count
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  std::uint64_t families_started_ = 0;
  std::uint64_t family_counter_ = 0;
  double first_family_time_ = 0.0;
  bool seen_family_ = false;
  std::uint64_t debug_check_every_ = 0;
};

/// Runs the torus from all type 0 until the first type-2 mutation event.
/// Throws CapExhaustedError with partial-state diagnostics if the event
/// budget is exceeded (default 10^9 events).
Tau2Sample run_tau2(const SimParams& params, RngStream& rng, std::uint64_t max_events = 0);

/// Replicated run_tau2 with per-replica streams (seed, replica) and
/// deterministic output order.
std::vector<Tau2Sample> tau2_batch(const SimParams& params, std::uint64_t reps, int threads,
                                   std::uint64_t max_events = 0);

}  // namespace spmoran
