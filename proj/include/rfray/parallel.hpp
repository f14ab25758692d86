#pragma once
// Deterministic fan-out over independent work items. Results land in input
// order and every per-item random stream is forked from the item index, so
// output bytes never depend on the worker count.

#include <atomic>
#include <cstdlib>
#include <future>
#include <thread>
#include <vector>

#include "rfray/core.hpp"

namespace rfray {

// Worker count: RFRAY_THREADS when set (>= 1), else 1.
inline int thread_count() {
  if (const char* env = std::getenv("RFRAY_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// fn(index) for index 0..n-1; returned vector is indexed identically.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t(0)))> {
  using R = decltype(fn(std::size_t(0)));
  std::vector<R> out(n);
  const int workers = std::min<int>(thread_count(), int(n) > 0 ? int(n) : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> tasks;
  tasks.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w)
    tasks.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) out[i] = fn(i);
    }));
  for (auto& t : tasks) t.get();  // rethrows the first worker exception
  return out;
}

}  // namespace rfray
