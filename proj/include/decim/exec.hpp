// Worker-thread resolution and a blocked parallel-for used by the filter's
// per-point passes. Results never depend on the worker count: every task
// writes only its own output slots.
#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace decim {

inline constexpr const char* kMaxThreadsEnvVar = "DECIM_MAX_THREADS";

// 0 means "auto": hardware concurrency, capped by DECIM_MAX_THREADS if set.
// An explicit request is honored as-is.
inline unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0)
        return requested;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0)
        hw = 1;
    if (const char* cap_str = std::getenv(kMaxThreadsEnvVar)) {
        const long cap = std::strtol(cap_str, nullptr, 10);
        if (cap > 0 && static_cast<unsigned>(cap) < hw)
            hw = static_cast<unsigned>(cap);
    }
    return hw;
}

// Runs body(begin, end) over contiguous chunks of [0, n). With one worker the
// body runs inline on the calling thread.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    if (n == 0)
        return;
    if (workers <= 1 || n == 1) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        if (begin >= n)
            break;
        const std::size_t end = std::min(begin + chunk, n);
        threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : threads)
        t.join();
}

inline double monotonic_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace decim
