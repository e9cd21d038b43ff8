#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

#include <omp.h>

namespace nucleus {

inline int max_threads() { return omp_get_max_threads(); }

// Scoped override of the OpenMP thread count (0 keeps the current setting).
class ThreadScope {
 public:
  explicit ThreadScope(int threads) : saved_(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

// Captures the first exception thrown inside a parallel region so it can be
// rethrown on the calling thread. Remaining iterations are skipped, not
// cancelled mid-flight.
class ExceptionGate {
 public:
  bool bad() const { return failed_.load(std::memory_order_relaxed); }

  template <class F>
  void run(F&& f) {
    if (bad()) return;
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!eptr_) eptr_ = std::current_exception();
      failed_.store(true, std::memory_order_relaxed);
    }
  }

  void rethrow() {
    if (eptr_) std::rethrow_exception(eptr_);
  }

 private:
  std::atomic<bool> failed_{false};
  std::mutex mu_;
  std::exception_ptr eptr_;
};

// Dynamic-scheduled parallel loop over [lo, hi). Body exceptions propagate.
template <class F>
void parallel_for(uint64_t lo, uint64_t hi, F&& f, int grain = 64) {
  if (hi <= lo) return;
  ExceptionGate gate;
#pragma omp parallel for schedule(dynamic, grain)
  for (int64_t i = static_cast<int64_t>(lo); i < static_cast<int64_t>(hi); i++) {
    gate.run([&] { f(static_cast<uint64_t>(i)); });
  }
  gate.rethrow();
}

// Exclusive prefix sum; returns the total.
template <class T>
T exclusive_prefix_sum(std::vector<T>& a) {
  T sum = 0;
  for (size_t i = 0; i < a.size(); i++) {
    T v = a[i];
    a[i] = sum;
    sum += v;
  }
  return sum;
}

}  // namespace nucleus
