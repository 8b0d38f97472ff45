#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fraclab {

/// Worker count: FRACLAB_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs fn(block) for block = 0..n_blocks-1 across workers. Blocks are
/// claimed dynamically (work stealing by atomic counter); callers that
/// need deterministic output must combine per-block results in block
/// order afterwards.
void parallel_for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

/// Deterministic parallel reduction: evaluates block_value(b) for each
/// block in parallel, then folds the results serially in block order
/// with compensated accumulation.
double parallel_reduce_blocks(std::size_t n_blocks, const std::function<double(std::size_t)>& block_value);

}  // namespace fraclab
