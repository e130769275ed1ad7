#include "moranifs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace moran {

namespace {
std::atomic<unsigned> g_cap{0};
}

void set_thread_cap(unsigned cap) { g_cap.store(cap); }

unsigned thread_cap() {
  unsigned c = g_cap.load();
  if (c == 0) c = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& f,
                  std::size_t min_chunk) {
  if (n == 0) return;
  unsigned workers = thread_cap();
  std::size_t chunks = std::max<std::size_t>(1, n / std::max<std::size_t>(
                                                      1, min_chunk));
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, chunks));
  if (workers <= 1) {
    f(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::size_t per = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * per;
    std::size_t hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        f(lo, hi);
      } catch (...) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true))
          err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace moran
