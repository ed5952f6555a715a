#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spmoran::detail {

/// Runs fn(0..n_blocks-1) across `threads` workers and returns the results
/// indexed by block. Work is pulled from an atomic counter, but results are
/// merged by block index, so the output is independent of the thread count.
/// The first worker exception is rethrown on the calling thread.
template <typename R, typename Fn>
std::vector<R> run_blocks(std::uint64_t n_blocks, int threads, Fn&& fn) {
  std::vector<R> results(n_blocks);
  if (threads <= 1 || n_blocks <= 1) {
    for (std::uint64_t i = 0; i < n_blocks; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= n_blocks) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n_threads = static_cast<std::uint64_t>(threads);
  pool.reserve(n_threads);
  for (std::uint64_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace spmoran::detail
