#pragma once

#include <stdexcept>
#include <string>

namespace spmoran {

/// A run exhausted an explicit budget (event count, horizon) instead of
/// reaching its stopping condition. Carries enough context to diagnose the
/// offending run; callers decide whether this is fatal.
class CapExhaustedError : public std::runtime_error {
 public:
  explicit CapExhaustedError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal invariant failed (index out of sync, singular solve on a
/// well-posed chain). Always a bug, never a user error.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace spmoran
