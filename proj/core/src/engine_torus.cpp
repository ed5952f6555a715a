#include <cmath>
#include <limits>
#include <stdexcept>

#include "spmoran/engine.hpp"
#include "spmoran/errors.hpp"

namespace spmoran {

TorusSim::TorusSim(const SimParams& params)
    : params_(params),
      geom_(params.geometry),
      two_d_(2 * params.geometry.dimension()),
      inv_two_d_(1.0 / (2 * params.geometry.dimension())),
      komarova_(params.dynamics == Dynamics::Komarova) {
  params_.validate();
  if (!geom_.is_torus()) throw std::invalid_argument("TorusSim: geometry must be a torus");
  n_sites_ = geom_.site_count();
  const auto n = static_cast<std::size_t>(n_sites_);
  type_.assign(n, 0);
  family_.assign(n, 0);
  origin_.assign(n, 0.0);
  pair_slot_.assign(n * static_cast<std::size_t>(two_d_), -1);
  occ_slot_.assign(n, -1);
  if (komarova_) {
    active_slot_.assign(n, -1);
    discordant_.assign(n, 0);
  }
  nbr_.resize(n * static_cast<std::size_t>(two_d_));
  for (std::uint64_t cell = 0; cell < n_sites_; ++cell) {
    const Site s = decode(geom_, cell);
    for (int dir = 0; dir < two_d_; ++dir)
      nbr_[static_cast<std::size_t>(cell) * two_d_ + static_cast<std::size_t>(dir)] =
          static_cast<std::uint32_t>(encode(geom_, neighbor(geom_, s, dir)));
  }
}

void TorusSim::add_pair(std::uint32_t cell, int dir) {
  const std::size_t id = static_cast<std::size_t>(cell) * two_d_ + static_cast<std::size_t>(dir);
  pair_slot_[id] = static_cast<std::int32_t>(pairs_.size());
  pairs_.push_back(static_cast<std::uint32_t>(id));
}

void TorusSim::remove_pair(std::uint32_t cell, int dir) {
  const std::size_t id = static_cast<std::size_t>(cell) * two_d_ + static_cast<std::size_t>(dir);
  const std::int32_t slot = pair_slot_[id];
  if (slot < 0) throw InternalError("TorusSim: removing a pair that is not indexed");
  pair_slot_[id] = -1;
  const std::uint32_t last = pairs_.back();
  pairs_.pop_back();
  if (slot != static_cast<std::int32_t>(pairs_.size())) {
    pairs_[static_cast<std::size_t>(slot)] = last;
    pair_slot_[last] = slot;
  }
}

void TorusSim::sync_active(std::uint32_t cell) {
  const bool want = discordant_[cell] > 0;
  const bool have = active_slot_[cell] >= 0;
  if (want == have) return;
  if (want) {
    active_slot_[cell] = static_cast<std::int32_t>(active_.size());
    active_.push_back(cell);
    return;
  }
  const std::int32_t slot = active_slot_[cell];
  active_slot_[cell] = -1;
  const std::uint32_t last = active_.back();
  active_.pop_back();
  if (slot != static_cast<std::int32_t>(active_.size())) {
    active_[static_cast<std::size_t>(slot)] = last;
    active_slot_[last] = slot;
  }
}

void TorusSim::occupy(std::uint32_t cell, std::uint64_t family, double origin) {
  type_[cell] = 1;
  family_[cell] = family;
  origin_[cell] = origin;
  occ_slot_[cell] = static_cast<std::int32_t>(occupied_.size());
  occupied_.push_back(cell);
  std::uint8_t opp = 0;
  for (int dir = 0; dir < two_d_; ++dir) {
    const std::uint32_t z = neighbor_cell(cell, dir);
    if (type_[z] == 1) {
      remove_pair(z, opposite_direction(dir));
      if (komarova_) {
        discordant_[z] -= 1;
        sync_active(z);
      }
    } else {
      add_pair(cell, dir);
      ++opp;
      if (komarova_) {
        discordant_[z] += 1;
        sync_active(z);
      }
    }
  }
  if (komarova_) {
    discordant_[cell] = opp;
    sync_active(cell);
  }
}

void TorusSim::release(std::uint32_t cell) {
  type_[cell] = 0;
  const std::int32_t slot = occ_slot_[cell];
  occ_slot_[cell] = -1;
  const std::uint32_t last = occupied_.back();
  occupied_.pop_back();
  if (slot != static_cast<std::int32_t>(occupied_.size())) {
    occupied_[static_cast<std::size_t>(slot)] = last;
    occ_slot_[last] = slot;
  }
  std::uint8_t opp = 0;
  for (int dir = 0; dir < two_d_; ++dir) {
    const std::uint32_t z = neighbor_cell(cell, dir);
    if (type_[z] == 1) {
      add_pair(z, opposite_direction(dir));
      ++opp;
      if (komarova_) {
        discordant_[z] += 1;
        sync_active(z);
      }
    } else {
      remove_pair(cell, dir);
      if (komarova_) {
        discordant_[z] -= 1;
        sync_active(z);
      }
    }
  }
  if (komarova_) {
    discordant_[cell] = opp;
    sync_active(cell);
  }
}

std::uint32_t TorusSim::pick_type0_cell(RngStream& rng) const {
  // Rejection sampling; in the tunneling regime type-1 cells are a vanishing
  // fraction of the torus, so this takes ~1 draw.
  while (true) {
    const auto c = static_cast<std::uint32_t>(rng.next_below(n_sites_));
    if (type_[c] == 0) return c;
  }
}

EventRates TorusSim::rates() const {
  EventRates r;
  const auto n1 = static_cast<double>(occupied_.size());
  const auto boundary = static_cast<double>(pairs_.size());
  if (komarova_) {
    r.resample = static_cast<double>(active_.size());
  } else {
    r.flip_up = params_.lambda * boundary * inv_two_d_;
    r.flip_down = boundary * inv_two_d_;
  }
  r.mutate01 = params_.u1 * (static_cast<double>(n_sites_) - n1);
  r.mutate12 = params_.u2 * n1;
  return r;
}

Event TorusSim::step(RngStream& rng) {
  ++events_;
  if (debug_check_every_ != 0 && events_ % debug_check_every_ == 0) check_consistency();

  // Quiescent skip: with no type-1 cells the only enabled transition is the
  // next 0 -> 1 mutation, exponential(u1 N) by exchangeability of sites.
  if (occupied_.empty()) {
    if (params_.u1 <= 0.0) return Event{EventKind::Absorbed, 0.0, Site{}};
    const double dt = rng.next_exponential(params_.u1 * static_cast<double>(n_sites_));
    time_ += dt;
    const std::uint32_t cell = pick_type0_cell(rng);
    ++families_started_;
    if (!seen_family_) {
      first_family_time_ = time_;
      seen_family_ = true;
    }
    occupy(cell, ++family_counter_, time_);
    return Event{EventKind::Mutate01, dt, decode(geom_, cell)};
  }

  const EventRates r = rates();
  const double total = r.total();
  if (total <= 0.0) return Event{EventKind::Absorbed, 0.0, Site{}};
  const double dt = rng.next_exponential(total);
  time_ += dt;

  const double channel_rate[5] = {r.flip_up, r.flip_down, r.resample, r.mutate01, r.mutate12};
  const double u = rng.next_double() * total;
  int chosen = -1, last_live = -1;
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
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
    case 0: {  // birth onto the type-0 end of a uniform discordant pair
      const std::uint32_t pair = pairs_[rng.next_below(pairs_.size())];
      const auto parent = static_cast<std::uint32_t>(pair / static_cast<std::uint32_t>(two_d_));
      const int dir = static_cast<int>(pair % static_cast<std::uint32_t>(two_d_));
      const std::uint32_t child = neighbor_cell(parent, dir);
      occupy(child, family_[parent], origin_[parent]);
      ev.kind = EventKind::FlipUp;
      ev.site = decode(geom_, child);
      return ev;
    }
    case 1: {  // death of the type-1 end of a uniform discordant pair
      const std::uint32_t pair = pairs_[rng.next_below(pairs_.size())];
      const auto cell = static_cast<std::uint32_t>(pair / static_cast<std::uint32_t>(two_d_));
      release(cell);
      ev.kind = EventKind::FlipDown;
      ev.site = decode(geom_, cell);
      return ev;
    }
    case 2: {  // Komarova resample
      const std::uint32_t cell = active_[rng.next_below(active_.size())];
      const std::uint8_t opp = discordant_[cell];
      const double n1 =
          type_[cell] == 1 ? static_cast<double>(two_d_ - opp) : static_cast<double>(opp);
      const double n0 = static_cast<double>(two_d_) - n1;
      const double p1 = params_.lambda * n1 / (params_.lambda * n1 + n0);
      const bool become_type1 = rng.next_double() < p1;
      ev.site = decode(geom_, cell);
      if (become_type1 == (type_[cell] == 1)) {
        ev.kind = EventKind::ResampleNoop;
        return ev;
      }
      if (become_type1) {
        // copy the lineage of a uniform type-1 neighbor
        std::uint32_t parents[6];
        int n_par = 0;
        for (int dir = 0; dir < two_d_; ++dir) {
          const std::uint32_t z = neighbor_cell(cell, dir);
          if (type_[z] == 1) parents[n_par++] = z;
        }
        const std::uint32_t parent = parents[rng.next_below(static_cast<std::uint64_t>(n_par))];
        occupy(cell, family_[parent], origin_[parent]);
        ev.kind = EventKind::FlipUp;
      } else {
        release(cell);
        ev.kind = EventKind::FlipDown;
      }
      return ev;
    }
    case 3: {  // mutation 0 -> 1 at a uniform type-0 cell
      const std::uint32_t cell = pick_type0_cell(rng);
      ++families_started_;
      if (!seen_family_) {
        first_family_time_ = time_;
        seen_family_ = true;
      }
      occupy(cell, ++family_counter_, time_);
      ev.kind = EventKind::Mutate01;
      ev.site = decode(geom_, cell);
      return ev;
    }
    default: {  // mutation 1 -> 2 at a uniform type-1 cell; the run's goal
      const std::uint32_t cell = occupied_[rng.next_below(occupied_.size())];
      ev.kind = EventKind::Mutate12;
      ev.site = decode(geom_, cell);
      return ev;
    }
  }
}

double TorusSim::lineage_origin_time(const Site& s) const {
  const auto cell = static_cast<std::uint32_t>(encode(geom_, s));
  if (type_[cell] != 1) throw std::invalid_argument("lineage_origin_time: site is not type 1");
  return origin_[cell];
}

std::uint64_t TorusSim::lineage_family(const Site& s) const {
  const auto cell = static_cast<std::uint32_t>(encode(geom_, s));
  if (type_[cell] != 1) throw std::invalid_argument("lineage_family: site is not type 1");
  return family_[cell];
}

void TorusSim::check_consistency() const {
  if (occupied_.size() > n_sites_) throw InternalError("TorusSim: impossible type-1 count");
  std::size_t n1 = 0, n_pairs = 0;
  for (std::uint64_t cell = 0; cell < n_sites_; ++cell) {
    const auto c = static_cast<std::uint32_t>(cell);
    if (type_[c] == 1) {
      ++n1;
      if (occ_slot_[c] < 0 || occupied_[static_cast<std::size_t>(occ_slot_[c])] != c)
        throw InternalError("TorusSim: occupied list out of sync");
    } else if (occ_slot_[c] != -1) {
      throw InternalError("TorusSim: stale occupied slot");
    }
    for (int dir = 0; dir < two_d_; ++dir) {
      const std::size_t id = static_cast<std::size_t>(c) * two_d_ + static_cast<std::size_t>(dir);
      const bool want = type_[c] == 1 && type_[neighbor_cell(c, dir)] == 0;
      if (want) {
        ++n_pairs;
        const std::int32_t slot = pair_slot_[id];
        if (slot < 0 || pairs_[static_cast<std::size_t>(slot)] != id)
          throw InternalError("TorusSim: pair index out of sync");
      } else if (pair_slot_[id] != -1) {
        throw InternalError("TorusSim: stale pair slot");
      }
    }
    if (komarova_) {
      std::uint8_t opp = 0;
      for (int dir = 0; dir < two_d_; ++dir)
        if (type_[neighbor_cell(c, dir)] != type_[c]) ++opp;
      if (opp != discordant_[c]) throw InternalError("TorusSim: discordance count out of sync");
      if ((opp > 0) != (active_slot_[c] >= 0)) throw InternalError("TorusSim: active set out of sync");
      if (active_slot_[c] >= 0 && active_[static_cast<std::size_t>(active_slot_[c])] != c)
        throw InternalError("TorusSim: active slot mismatch");
    }
  }
  if (n1 != occupied_.size()) throw InternalError("TorusSim: type-1 count mismatch");
  if (n_pairs != pairs_.size()) throw InternalError("TorusSim: pair count mismatch");
}

}  // namespace spmoran
