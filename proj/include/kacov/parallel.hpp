#pragma once

#include <cstddef>
#include <functional>

namespace kacov {

// Worker count from KACOV_THREADS, falling back to hardware concurrency.
// Throws InputError if the variable is set but is not a positive integer.
std::size_t configured_workers();

// Overrides configured_workers() for the current process; 0 restores the
// environment-derived default.
void set_worker_override(std::size_t workers);

// Calls fn(i) for every i in [begin, end). Indices are handed out
// dynamically, so fn must write only to slots owned by i. Nested calls from
// inside a worker run inline. The first exception thrown by any fn is
// rethrown on the calling thread after all workers stop.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = 0);

}  // namespace kacov
