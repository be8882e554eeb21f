#pragma once

#include <functional>

namespace resconv {

// Worker count from RESCONV_THREADS (default 1).
int thread_count();

// Runs body(i) for i in [0, n); each index is handled by exactly one worker.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace resconv
