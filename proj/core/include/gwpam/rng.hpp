#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace gwpam {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent stream; stream 0 is distinct from the parent seed itself.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Worker count from GWPAM_WORKERS, defaulting to hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Results must be
// written to per-index slots by the caller so aggregation order stays fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gwpam
