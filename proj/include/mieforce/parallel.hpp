#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace mieforce {

/// Environment variable holding the default worker count.
inline constexpr const char* kThreadsEnvVar = "MIEFORCE_THREADS";

/// MIEFORCE_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
inline int default_thread_count() {
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0..count-1) on up to `threads` workers and returns the results
/// in index order. Callers reduce the vector sequentially, so sums do not
/// depend on scheduling. The exception of the lowest failing index is
/// rethrown.
template <class F>
auto parallel_map(std::size_t count, int threads, F&& f) {
  using R = std::decay_t<decltype(f(std::size_t{}))>;
  std::vector<R> out(count);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace mieforce
