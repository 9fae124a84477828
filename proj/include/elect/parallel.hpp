#pragma once

#include <cstddef>
#include <functional>

namespace elect {

// Worker count for parallel_for. Defaults to std::thread::hardware_concurrency();
// the ELECT_THREADS environment variable overrides it.
std::size_t worker_count();
void set_worker_count(std::size_t workers);  // 0 restores the default

// Calls task(i) for i in [0, n) on up to worker_count() threads. Tasks must
// only write to their own output slot, which keeps results independent of
// scheduling. The first exception thrown by a task is rethrown after all
// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace elect
