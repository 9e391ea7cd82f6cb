#pragma once

#include <cstddef>
#include <functional>

namespace qsd {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is run
/// exactly once; callers write results into slot i so the outcome does not
/// depend on scheduling. workers <= 1 runs inline.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

/// Worker count from QSD_WORKERS, else 1.
int default_workers();

}  // namespace qsd
