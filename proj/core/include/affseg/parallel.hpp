#pragma once

#include <cstddef>
#include <functional>

namespace affseg {

/// Process-wide cap on worker threads used inside library calls (default 1).
/// Results never depend on this value: parallel sections split work into
/// fixed chunks and combine them in chunk order.
void set_max_threads(unsigned n) noexcept;
unsigned max_threads() noexcept;

/// Runs body(i) for i in [0, n) on up to max_threads() workers. The first
/// exception thrown by any task is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace affseg
