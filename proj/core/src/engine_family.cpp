#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spmoran/engine.hpp"
#include "spmoran/errors.hpp"

namespace spmoran {

void SimParams::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("SimParams: lambda must be positive");
  if (!(u1 >= 0.0) || u1 > 1.0) throw std::invalid_argument("SimParams: u1 must lie in [0, 1]");
  if (!(u2 >= 0.0) || u2 > 1.0) throw std::invalid_argument("SimParams: u2 must lie in [0, 1]");
  if (geometry.is_torus() && geometry.site_count() > (std::uint64_t{1} << 26))
    throw std::invalid_argument("SimParams: torus too large for the dense representation (N <= 2^26)");
}

FamilySim::FamilySim(const SimParams& params)
    : params_(params),
      geom_(params.geometry),
      two_d_(2 * params.geometry.dimension()),
      inv_two_d_(1.0 / (2 * params.geometry.dimension())),
      komarova_(params.dynamics == Dynamics::Komarova) {
  params_.validate();
  if (geom_.is_torus())
    throw std::invalid_argument("FamilySim: single-family mode runs on the unbounded lattice");
  if (params_.u1 != 0.0)
    throw std::invalid_argument("FamilySim: single-family mode requires u1 = 0");
  occupied_.reserve(1024);
  pairs_.reserve(1024);
  occupy(Site{});  // single type-1 cell at the origin
}

void FamilySim::add_pair(const Site& from, Cell& owner, int dir) {
  owner.pair_slot[static_cast<std::size_t>(dir)] = static_cast<std::int32_t>(pairs_.size());
  pairs_.push_back(PairRef{from, static_cast<std::uint8_t>(dir)});
}

void FamilySim::remove_pair(Cell& owner, int dir) {
  const std::int32_t slot = owner.pair_slot[static_cast<std::size_t>(dir)];
  if (slot < 0) throw InternalError("FamilySim: removing a pair that is not indexed");
  owner.pair_slot[static_cast<std::size_t>(dir)] = -1;
  const PairRef last = pairs_.back();
  pairs_.pop_back();
  if (slot != static_cast<std::int32_t>(pairs_.size())) {
    pairs_[static_cast<std::size_t>(slot)] = last;
    Cell* last_owner = cells_.find(encode(geom_, last.from));
    last_owner->pair_slot[last.dir] = slot;
  }
}

void FamilySim::sync_active(const Site& s, Cell& cell) {
  const bool want = cell.discordant > 0;
  const bool have = cell.active_slot >= 0;
  if (want == have) return;
  if (want) {
    cell.active_slot = static_cast<std::int32_t>(active_.size());
    active_.push_back(encode(geom_, s));
    return;
  }
  const std::int32_t slot = cell.active_slot;
  cell.active_slot = -1;
  const SiteKey last = active_.back();
  active_.pop_back();
  if (slot != static_cast<std::int32_t>(active_.size())) {
    active_[static_cast<std::size_t>(slot)] = last;
    cells_.find(last)->active_slot = slot;
  }
}

void FamilySim::occupy(const Site& y) {
  cells_.reserve_extra(komarova_ ? static_cast<std::size_t>(1 + two_d_) : 1);
  const SiteKey ky = encode(geom_, y);
  Cell& cy = cells_.get_or_insert(ky);
  cy.occupied = 1;
  cy.occ_slot = static_cast<std::int32_t>(occupied_.size());
  occupied_.push_back(y);
  std::int32_t empty_nbrs = 0;
  for (int dir = 0; dir < two_d_; ++dir) {
    const Site z = neighbor(geom_, y, dir);
    const SiteKey kz = encode(geom_, z);
    Cell* cz = cells_.find(kz);
    if (cz != nullptr && cz->occupied) {
      remove_pair(*cz, opposite_direction(dir));
      if (komarova_) {
        cz->discordant -= 1;
        sync_active(z, *cz);
      }
    } else {
      add_pair(y, cy, dir);
      ++empty_nbrs;
      if (komarova_) {
        Cell& ce = (cz != nullptr) ? *cz : cells_.get_or_insert(kz);
        ce.discordant += 1;
        sync_active(z, ce);
      }
    }
  }
  if (komarova_) {
    cy.discordant = empty_nbrs;
    sync_active(y, cy);
  }
}

void FamilySim::release(const Site& x) {
  const SiteKey kx = encode(geom_, x);
  Cell& cx = *cells_.find(kx);
  const std::int32_t slot = cx.occ_slot;
  cx.occ_slot = -1;
  cx.occupied = 0;
  const Site last_site = occupied_.back();
  occupied_.pop_back();
  if (slot != static_cast<std::int32_t>(occupied_.size())) {
    occupied_[static_cast<std::size_t>(slot)] = last_site;
    cells_.find(encode(geom_, last_site))->occ_slot = slot;
  }
  std::array<SiteKey, 7> to_erase;
  int n_erase = 0;
  std::int32_t occ_nbrs = 0;
  for (int dir = 0; dir < two_d_; ++dir) {
    const Site z = neighbor(geom_, x, dir);
    const SiteKey kz = encode(geom_, z);
    Cell* cz = cells_.find(kz);
    if (cz != nullptr && cz->occupied) {
      add_pair(z, *cz, opposite_direction(dir));
      ++occ_nbrs;
      if (komarova_) {
        cz->discordant += 1;
        sync_active(z, *cz);
      }
    } else {
      remove_pair(cx, dir);
      if (komarova_ && cz != nullptr) {
        cz->discordant -= 1;
        sync_active(z, *cz);
        if (cz->discordant == 0) to_erase[static_cast<std::size_t>(n_erase++)] = kz;
      }
    }
  }
  if (komarova_) {
    cx.discordant = occ_nbrs;
    sync_active(x, cx);
    if (occ_nbrs == 0) to_erase[static_cast<std::size_t>(n_erase++)] = kx;
  } else {
    to_erase[static_cast<std::size_t>(n_erase++)] = kx;
  }
  for (int i = 0; i < n_erase; ++i) cells_.erase(to_erase[static_cast<std::size_t>(i)]);
}

EventRates FamilySim::rates() const {
  EventRates r;
  const auto boundary = static_cast<double>(pairs_.size());
  if (komarova_) {
    r.resample = static_cast<double>(active_.size());
  } else {
    r.flip_up = params_.lambda * boundary * inv_two_d_;
    r.flip_down = boundary * inv_two_d_;
  }
  r.mutate12 = params_.u2 * static_cast<double>(occupied_.size());
  return r;
}

Event FamilySim::step(RngStream& rng) {
  const EventRates r = rates();
  const double total = r.total();
  if (total <= 0.0) return Event{EventKind::Absorbed, 0.0, Site{}};

  const double dt = rng.next_exponential(total);
  time_ += dt;
  man_hours_ += static_cast<double>(occupied_.size()) * dt;
  ++events_;
  if (debug_check_every_ != 0 && events_ % debug_check_every_ == 0) check_consistency();

  // Channel selection: one uniform draw against the cumulative rates in the
  // fixed order flip-up, flip-down, resample, mutate-12. Zero-rate channels
  // are skipped, and rounding leaks fall back to the last live channel.
  const double channel_rate[4] = {r.flip_up, r.flip_down, r.resample, r.mutate12};
  const double u = rng.next_double() * total;
  int chosen = -1, last_live = -1;
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (channel_rate[i] <= 0.0) continue;
    last_live = i;
    if (chosen < 0) {
      acc += channel_rate[i];
      if (u < acc) chosen = i;
    }
  }
  if (chosen < 0) chosen = last_live;

  Event ev;
  ev.dt = dt;
  switch (chosen) {
    case 0: {  // flip up: the type-0 end of a uniform discordant pair
      const PairRef p = pairs_[rng.next_below(pairs_.size())];
      ev.kind = EventKind::FlipUp;
      ev.site = neighbor(geom_, p.from, p.dir);
      occupy(ev.site);
      return ev;
    }
    case 1: {  // flip down: the type-1 end of a uniform discordant pair
      ev.kind = EventKind::FlipDown;
      ev.site = pairs_[rng.next_below(pairs_.size())].from;
      release(ev.site);
      return ev;
    }
    case 2: {  // Komarova resample
      const SiteKey k = active_[rng.next_below(active_.size())];
      const Site s = decode(geom_, k);
      Cell& cell = *cells_.find(k);
      const std::int32_t opp = cell.discordant;
      const double n1 = cell.occupied ? static_cast<double>(two_d_ - opp) : static_cast<double>(opp);
      const double n0 = static_cast<double>(two_d_) - n1;
      const double p1 = params_.lambda * n1 / (params_.lambda * n1 + n0);
      const bool become_type1 = rng.next_double() < p1;
      ev.site = s;
      if (become_type1 == static_cast<bool>(cell.occupied)) {
        ev.kind = EventKind::ResampleNoop;
      } else if (become_type1) {
        ev.kind = EventKind::FlipUp;
        occupy(s);
      } else {
        ev.kind = EventKind::FlipDown;
        release(s);
      }
      return ev;
    }
    default: {
      ev.kind = EventKind::Mutate12;
      ev.site = occupied_[rng.next_below(occupied_.size())];
      return ev;
    }
  }
}

void FamilySim::check_consistency() const {
  // Occupied list <-> map flags.
  for (std::size_t i = 0; i < occupied_.size(); ++i) {
    const Cell* c = cells_.find(encode(geom_, occupied_[i]));
    if (c == nullptr || !c->occupied || c->occ_slot != static_cast<std::int32_t>(i))
      throw InternalError("FamilySim: occupied list out of sync");
  }
  std::size_t occupied_in_map = 0;
  cells_.for_each([&](SiteKey, const Cell& c) {
    if (c.occupied) ++occupied_in_map;
  });
  if (occupied_in_map != occupied_.size())
    throw InternalError("FamilySim: occupied count mismatch");

  // Rebuild the pair index from scratch.
  std::size_t expected_pairs = 0;
  for (const Site& x : occupied_) {
    const Cell* cx = cells_.find(encode(geom_, x));
    for (int dir = 0; dir < two_d_; ++dir) {
      const Site z = neighbor(geom_, x, dir);
      const Cell* cz = cells_.find(encode(geom_, z));
      const bool z_occ = cz != nullptr && cz->occupied;
      const std::int32_t slot = cx->pair_slot[static_cast<std::size_t>(dir)];
      if (z_occ) {
        if (slot != -1) throw InternalError("FamilySim: stale pair over a concordant edge");
      } else {
        ++expected_pairs;
        if (slot < 0 || slot >= static_cast<std::int32_t>(pairs_.size()))
          throw InternalError("FamilySim: missing pair slot");
        const PairRef& p = pairs_[static_cast<std::size_t>(slot)];
        if (!(p.from == x) || p.dir != dir) throw InternalError("FamilySim: pair slot mismatch");
      }
    }
  }
  if (expected_pairs != pairs_.size()) throw InternalError("FamilySim: pair count mismatch");

  if (komarova_) {
    std::size_t expected_active = 0;
    bool ok = true;
    cells_.for_each([&](SiteKey k, const Cell& c) {
      const Site s = decode(geom_, k);
      std::int32_t opp = 0;
      for (int dir = 0; dir < two_d_; ++dir) {
        const Cell* cz = cells_.find(encode(geom_, neighbor(geom_, s, dir)));
        const bool z_occ = cz != nullptr && cz->occupied;
        if (z_occ != static_cast<bool>(c.occupied)) ++opp;
      }
      if (opp != c.discordant) ok = false;
      if (!c.occupied && c.discordant == 0) ok = false;  // stale frontier entry
      if ((c.discordant > 0) != (c.active_slot >= 0)) ok = false;
      if (c.active_slot >= 0) {
        ++expected_active;
        if (c.active_slot >= static_cast<std::int32_t>(active_.size()) ||
            active_[static_cast<std::size_t>(c.active_slot)] != k)
          ok = false;
      }
    });
    if (!ok || expected_active != active_.size())
      throw InternalError("FamilySim: Komarova discordance bookkeeping out of sync");
  }
}

FamilyOutcome run_family(const SimParams& params, const FamilyCaps& caps, RngStream& rng) {
  FamilySim sim(params);
  FamilyOutcome out;

  std::vector<std::uint64_t> levels(caps.hit_levels.begin(), caps.hit_levels.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t next_level = 0;
  auto record_levels = [&] {
    while (next_level < levels.size() && sim.size() >= levels[next_level]) {
      out.first_hit.push_back({levels[next_level],
                               LevelRecord{sim.time(), sim.man_hours(), sim.boundary_pairs()}});
      ++next_level;
    }
  };
  record_levels();  // the family starts at size 1

  while (true) {
    const Event ev = sim.step(rng);
    switch (ev.kind) {
      case EventKind::FlipUp:
        ++out.up_jumps;
        if (sim.size() > out.max_size) {
          out.max_size = sim.size();
          record_levels();
        }
        break;
      case EventKind::FlipDown:
        ++out.down_jumps;
        break;
      case EventKind::ResampleNoop:
        break;
      case EventKind::Mutate12:
        out.fate = FamilyFate::Type2Born;
        goto done;
      case EventKind::Mutate01:
        throw InternalError("run_family: unexpected 0->1 mutation in single-family mode");
      case EventKind::Absorbed:
        throw InternalError("run_family: absorbed state with cells alive");
    }
    if (sim.man_hours() >= caps.man_hours_cap) {
      out.fate = FamilyFate::ManHourCapHit;
      goto done;
    }
    if (sim.size() == 0) {
      out.fate = FamilyFate::Extinct;
      goto done;
    }
    if (sim.size() >= caps.size_cap) {
      out.fate = FamilyFate::SizeCapHit;
      goto done;
    }
  }
done:
  out.man_hours = sim.man_hours();
  out.t_end = sim.time();
  return out;
}

}  // namespace spmoran
