#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cft {

// Runs fn(item) for every item, on up to `jobs` threads. Callers write
// results into per-item slots, so scheduling cannot affect the outcome; the
// first exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for_each(const std::vector<std::size_t>& items, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || items.size() <= 1) {
    for (std::size_t v : items) fn(v);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= items.size() || failed.load()) return;
      try {
        fn(items[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  std::size_t n = std::min<std::size_t>(jobs, items.size());
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cft
