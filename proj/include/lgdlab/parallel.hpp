#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace lgdlab {

// Worker count from LGDLAB_THREADS (0 or unset = all cores).
std::size_t worker_count();

// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks must write
// only to their own output slot; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task, std::size_t workers = 0);

// Stream seed for item `index` under a master seed (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace lgdlab
