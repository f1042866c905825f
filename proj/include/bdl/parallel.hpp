#pragma once

#include <cstddef>
#include <functional>

namespace bdl {

// Upper bound on worker threads used by parallel_for. Defaults to 1.
void set_thread_cap(std::size_t threads);
std::size_t thread_cap();

// Calls fn(i) for i in [0, n), split into contiguous chunks across at most
// thread_cap() threads. Callers must make fn(i) independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bdl
