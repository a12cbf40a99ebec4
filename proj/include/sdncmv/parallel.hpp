#pragma once

#include <cstddef>
#include <functional>

namespace sdncmv {

/// Default worker count: SDNCMV_JOBS when set, otherwise 1.
int default_jobs();

/// Run body(i) for i in [0, count) on up to `jobs` threads. Tasks must be
/// independent; results must not depend on execution order. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace sdncmv
