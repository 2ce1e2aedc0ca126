#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace kita {

// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
// results are identical for any worker count.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned nt = std::min<std::size_t>(threads, n);
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; t++) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace kita
