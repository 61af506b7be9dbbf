#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace tableforge {

/// Worker count: hardware concurrency capped by TABLEFORGE_THREADS.
inline unsigned thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("TABLEFORGE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

/// Runs fn(i) for i in [0, n) over contiguous index chunks. Each index owns
/// its output slot, so results are identical for any worker count.
template <typename Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
    const unsigned workers = thread_budget();
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(workers, n);
    const std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = c * per;
        const std::size_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace tableforge
