#pragma once

#include <cstddef>
#include <functional>

namespace blockboot {

/// Worker count used when a caller passes threads = 0.
[[nodiscard]] unsigned default_thread_count() noexcept;

/**
 * Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
 * concurrency). Indices are split into contiguous static chunks; body must only
 * write to state owned by index i. The first exception thrown is rethrown.
 */
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace blockboot
