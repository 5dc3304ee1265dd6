#pragma once

#include <cstddef>
#include <functional>

namespace rotor {

/// Number of worker threads to use. `requested == 0` means "hardware
/// concurrency"; the result is capped by the ROTOR_BANDS_THREADS environment
/// variable when it is set to a positive integer.
unsigned worker_count(unsigned requested = 0);

/// Calls body(i) for i in [0, n). Each index is visited exactly once, so
/// bodies that write only to slot i give schedule-independent results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

} // namespace rotor
