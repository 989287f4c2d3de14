#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace oulab {

// Runs body(index) for index = 0..count-1 over a fixed number of worker
// threads. Each index is processed exactly once and the body must only
// write to per-index slots, so results cannot depend on the worker count.
template <typename Body>
void parallel_for_index(std::uint64_t count, int workers, Body&& body) {
    if (workers <= 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::uint64_t w = static_cast<std::uint64_t>(workers);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::uint64_t t = 0; t < w; ++t) {
        const std::uint64_t lo = count * t / w;
        const std::uint64_t hi = count * (t + 1) / w;
        pool.emplace_back([lo, hi, &body] {
            for (std::uint64_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace oulab
