/// \file util.hpp
/// Shared small utilities: error types, compensated summation, parallel map.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace zms {

/// Thrown when an iterative numerical procedure cannot reach its target
/// (step-size underflow, missing bracket, failed cross-check, ...).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Kahan–Neumaier compensated accumulator. Summation order is fixed by the
/// caller, so reductions stay deterministic.
struct kahan_sum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(double x, const std::string& name) {
  if (!std::isfinite(x)) throw std::invalid_argument(name + " must be finite");
}

/// Number of worker threads to use when `requested` is 0.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Run fn(i) for i in [0, n). Results must be written to per-index storage;
/// the partition is static so the output does not depend on thread count.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::vector<double> make_log_grid(double lo, double hi, int n) {
  require(lo > 0 && hi > lo && n >= 2, "make_log_grid: bad range");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

/// FNV-1a over a string; used for cache keys that must be stable across runs.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace zms
