#pragma once

#include <cstddef>
#include <functional>

namespace moran {

// Process-wide worker cap (CLI --threads); 0 = hardware concurrency.
void set_thread_cap(unsigned cap);
unsigned thread_cap();

// Static range split across workers; f(begin, end) per chunk. Falls back to
// inline execution for small ranges or a cap of 1.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& f,
                  std::size_t min_chunk = 4096);

}  // namespace moran
