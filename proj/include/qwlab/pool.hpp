#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qwlab {

/// Run fn(0..n-1) on up to `workers` threads. Work is claimed by index from an
/// atomic counter and each job writes only to its own index-addressed slots,
/// so results are reduction-order independent: output is identical for any
/// worker count. The first exception (if any) is rethrown on the caller.
template <class Fn>
void parallel_for_indexed(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int team = std::min(workers, n);
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(team);
  for (int t = 0; t < team; ++t) threads.emplace_back(body);
  for (auto& th : threads) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace qwlab
