#pragma once

#include <cstddef>
#include <functional>

namespace modspec {

/// Number of worker threads used by per-frequency and per-cell maps.
/// Defaults to 1; the CLI sets it from --jobs / MODSPEC_JOBS.
std::size_t default_jobs();
void set_default_jobs(std::size_t jobs);

/// Calls fn(i) for i in [0, n). Each index is visited exactly once; the
/// first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t jobs = 0);

}  // namespace modspec
