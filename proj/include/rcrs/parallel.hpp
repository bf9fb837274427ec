#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace rcrs {

// Worker threads: RCRS_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("RCRS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Calls fn(i) for i in [0,count) on a pool of workers. The first exception
// thrown by any call is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::int64_t count, Fn&& fn, unsigned threads = worker_count()) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  const auto n = static_cast<unsigned>(std::min<std::int64_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Splits [0,trials) into fixed-size chunks, evaluates fn(begin, end) -> Acc
// per chunk in parallel and merges the results in chunk order, so the
// outcome does not depend on the number of threads.
template <class Acc, class Fn>
Acc chunked_reduce(std::int64_t trials, std::int64_t chunk, Fn&& fn, unsigned threads = worker_count()) {
  const std::int64_t chunks = trials <= 0 ? 0 : (trials + chunk - 1) / chunk;
  std::vector<std::optional<Acc>> parts(static_cast<std::size_t>(chunks));
  parallel_for(
      chunks,
      [&](std::int64_t c) {
        const std::int64_t begin = c * chunk;
        const std::int64_t end = std::min(trials, begin + chunk);
        parts[static_cast<std::size_t>(c)].emplace(fn(begin, end));
      },
      threads);
  if (parts.empty()) return fn(0, 0);
  Acc total = std::move(*parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) total.merge(*parts[i]);
  return total;
}

}  // namespace rcrs
