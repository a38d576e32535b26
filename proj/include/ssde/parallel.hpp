#pragma once

#include <cstddef>
#include <functional>

namespace ssde {

/// Worker count: hardware concurrency, capped by SINGULAR_SDE_THREADS.
int worker_count();

/// Runs body(i) for i in [begin, end) over a static block partition.
/// Each index is visited exactly once; the caller writes results into
/// per-index slots so the outcome does not depend on the worker count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace ssde
