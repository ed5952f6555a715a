#pragma once

#include <cstddef>
#include <vector>

#include "spmoran/lattice.hpp"

namespace spmoran::detail {

/// Open-addressed hash map from SiteKey to V with linear probing and
/// backward-shift deletion. Key 0 marks an empty slot; unbounded-lattice
/// keys are never 0 by construction of the coordinate packing.
///
/// Pointers returned by find()/get_or_insert() stay valid until the next
/// insert (possible rehash) or erase (backward shift); the engine batches
/// its per-event map mutations accordingly.
template <typename V>
class FlatSiteMap {
 public:
  explicit FlatSiteMap(std::size_t min_capacity = 64) {
    std::size_t cap = 16;
    while (cap < min_capacity) cap <<= 1;
    slots_.assign(cap, Slot{});
    mask_ = cap - 1;
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }

  V* find(SiteKey key) {
    std::size_t i = hash_key(key) & mask_;
    while (true) {
      Slot& s = slots_[i];
      if (s.key == key) return &s.value;
      if (s.key == 0) return nullptr;
      i = (i + 1) & mask_;
    }
  }
  const V* find(SiteKey key) const { return const_cast<FlatSiteMap*>(this)->find(key); }

  /// Value for key, default-constructed on first access. May rehash unless
  /// capacity was reserved beforehand.
  V& get_or_insert(SiteKey key) {
    if (overloaded(size_ + 1)) grow(2 * slots_.size());
    std::size_t i = hash_key(key) & mask_;
    while (true) {
      Slot& s = slots_[i];
      if (s.key == key) return s.value;
      if (s.key == 0) {
        s.key = key;
        s.value = V{};
        ++size_;
        return s.value;
      }
      i = (i + 1) & mask_;
    }
  }

  /// Guarantees the next `extra` insertions cannot trigger a rehash.
  void reserve_extra(std::size_t extra) {
    if (overloaded(size_ + extra)) {
      std::size_t cap = slots_.size();
      while (overloadedFor(size_ + extra, cap)) cap <<= 1;
      grow(cap);
    }
  }

  /// Removes key if present; returns whether it was. Backward-shift keeps
  /// probe chains intact without tombstones.
  bool erase(SiteKey key) {
    std::size_t i = hash_key(key) & mask_;
    while (true) {
      Slot& s = slots_[i];
      if (s.key == 0) return false;
      if (s.key == key) break;
      i = (i + 1) & mask_;
    }
    std::size_t j = i;
    while (true) {
      slots_[i].key = 0;
      while (true) {
        j = (j + 1) & mask_;
        if (slots_[j].key == 0) {
          --size_;
          return true;
        }
        const std::size_t ideal = hash_key(slots_[j].key) & mask_;
        if (((j - ideal) & mask_) >= ((j - i) & mask_)) break;
      }
      slots_[i] = slots_[j];
      i = j;
    }
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const Slot& s : slots_)
      if (s.key != 0) fn(s.key, s.value);
  }

  void clear() {
    for (Slot& s : slots_) s = Slot{};
    size_ = 0;
  }

 private:
  struct Slot {
    SiteKey key = 0;
    V value{};
  };

  bool overloaded(std::size_t n) const { return overloadedFor(n, slots_.size()); }
  static bool overloadedFor(std::size_t n, std::size_t cap) { return n * 5 > cap * 3; }

  void grow(std::size_t new_cap) {
    std::vector<Slot> old;
    old.swap(slots_);
    slots_.assign(new_cap, Slot{});
    mask_ = new_cap - 1;
    for (Slot& s : old) {
      if (s.key == 0) continue;
      std::size_t i = hash_key(s.key) & mask_;
      while (slots_[i].key != 0) i = (i + 1) & mask_;
      slots_[i] = s;
    }
  }

  std::vector<Slot> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

}  // namespace spmoran::detail
