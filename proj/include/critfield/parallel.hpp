#pragma once

#include <cstddef>
#include <functional>

namespace critfield {

/// Process-wide cap on worker threads. 0 restores the default (hardware
/// concurrency). Results never depend on this value.
void set_max_threads(int n);
int max_threads();

/// Calls body(i) for i in [0, n) on up to max_threads() workers. Each index is
/// visited exactly once; callers write into per-index slots and reduce in index
/// order afterwards. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace critfield
