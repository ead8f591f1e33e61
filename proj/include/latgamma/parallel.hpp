#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace latgamma {

/// Number of worker threads used by parallel loops (>= 1).
std::size_t thread_count();

/// Sets the worker count; 0 selects std::thread::hardware_concurrency().
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over a static contiguous partition of [0, n).
/// Partition boundaries depend only on n and the thread count, and callers
/// write into disjoint slots, so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise (tree) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> values);

}  // namespace latgamma
