#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include "bandsis/common.hpp"

namespace bandsis {

// Runs fn(i) for i in [0, count) across `workers` threads. Each index is
// processed exactly once; fn must write only to slot i of its output and
// must derive randomness solely from i (counter RNG streams), so the result
// is identical for every worker count.
template <typename Fn>
void parallel_for(std::uint64_t count, int workers, Fn&& fn) {
  if (workers < 1) throw error("worker count must be >= 1");
  if (workers == 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::uint64_t w = static_cast<std::uint64_t>(workers);
  if (w > count) w = count;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::uint64_t k = 0; k < w; ++k) {
    std::uint64_t lo = count * k / w;
    std::uint64_t hi = count * (k + 1) / w;
    threads.emplace_back([lo, hi, &fn]() {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace bandsis
