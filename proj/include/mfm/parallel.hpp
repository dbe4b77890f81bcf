#pragma once

#include <cstddef>
#include <functional>

namespace mfm {

// Worker count: MFM_THREADS when set (>= 1), otherwise hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, count). Each index is processed exactly once;
// callers write results into per-index slots so aggregation order is fixed.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mfm
