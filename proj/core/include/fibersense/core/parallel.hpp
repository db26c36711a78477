#pragma once

#include <cstddef>
#include <functional>

namespace fibersense::core {

/// Worker count used by parallel_for; defaults to the hardware concurrency.
void set_default_jobs(std::size_t jobs);
std::size_t default_jobs();

/// Splits [0, n) into contiguous chunks processed by up to `jobs` threads.
/// `body(begin, end)` must only touch state owned by its range; results are
/// then independent of the job count. Exceptions propagate to the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t jobs = 0);

}  // namespace fibersense::core
