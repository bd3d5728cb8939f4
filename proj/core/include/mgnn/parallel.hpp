#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace mgnn {

/// Runs work(0..count-1) on up to `jobs` threads with a fixed strided split.
/// Callers write results into preallocated slots by index, so the merged
/// output is independent of scheduling order.
inline void parallel_cells(int count, int jobs, const std::function<void(int)>& work) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (int t = 0; t < jobs; ++t)
    threads.emplace_back([&, t] {
      for (int i = t; i < count; i += jobs) work(i);
    });
  for (auto& th : threads) th.join();
}

}  // namespace mgnn
