#pragma once

#include <cstddef>
#include <functional>

namespace balance {

/// Worker cap: BALANCE_THREADS if set to a positive integer, else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(0) .. body(count - 1) on up to `threads` workers. Tasks are claimed
/// from a shared counter; the first exception thrown is rethrown after all
/// workers join. Callers write results into per-index slots, so output never
/// depends on the worker count.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace balance
