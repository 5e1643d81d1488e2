#pragma once

#include <cstddef>
#include <functional>

namespace maxent_tomo {

// Worker count: hardware concurrency, capped by MAXENT_TOMO_THREADS when set.
int thread_count();

// Runs body(i) for i in [0, n). Iterations must be independent; exceptions
// thrown by any iteration are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace maxent_tomo
