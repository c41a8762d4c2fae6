#pragma once

#include <cstddef>
#include <functional>

namespace gausslab {

/// Worker count from GAUSSLAB_WORKERS, else the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for every i in [0, count). Work is handed out in fixed blocks;
/// callers write results per index and reduce in index order, so outputs do
/// not depend on the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gausslab
