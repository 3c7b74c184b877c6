#pragma once

#include <atomic>
#include <cstdint>

namespace dyngal {

// Tally of arithmetic work (complex multiply-adds and solver vector ops).
// Atomic so internally parallel assembly/apply could share one counter;
// merge() folds a thread-confined tally back in.
class workload_counter {
 public:
  workload_counter() = default;
  workload_counter(const workload_counter& other) : ops_(other.total()) {}

  void add(std::uint64_t n) { ops_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t total() const { return ops_.load(std::memory_order_relaxed); }
  void merge(const workload_counter& other) { add(other.total()); }
  void reset() { ops_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> ops_{0};
};

}  // namespace dyngal
