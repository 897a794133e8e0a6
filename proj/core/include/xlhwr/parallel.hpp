#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace xlhwr {

// Runs fn(i) for i in [0, n) on `jobs` workers with a static block-cyclic
// partition: worker t handles i = t, t+jobs, t+2*jobs, ... Results that
// depend on combination order must be stored per index (or per worker and
// reduced in worker order) by the caller; the partition itself is a pure
// function of (n, jobs), so reductions done that way are deterministic
// regardless of scheduling or core count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (jobs > n) jobs = n;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([t, n, jobs, &fn] {
      for (std::size_t i = t; i < n; i += jobs) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace xlhwr
