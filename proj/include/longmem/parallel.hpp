#ifndef LONGMEM_PARALLEL_HPP
#define LONGMEM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace longmem::parallel {

/// Worker count for trial-level parallelism: LONGMEM_THREADS if set
/// (0 or 1 means sequential), otherwise the hardware concurrency.
std::size_t trial_threads();

/// Runs body(i) for i in [0, n). Each index must be independent; results go
/// into caller-owned slots, so outputs are identical at any thread count.
void for_each_trial(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace longmem::parallel

#endif
