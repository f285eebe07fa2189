#pragma once

#include <cstddef>
#include <functional>

namespace robustkit {

// Runs fn(i) for i in [0,n) across a small pool of tasks. Callers write
// results into index-addressed storage and reduce afterwards in index order,
// so outputs never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace robustkit
