#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace multistop {

/// Runs fn(begin, end) over disjoint chunks of [0, n) on up to
/// hardware_concurrency threads and joins them (one barrier). Callers must
/// make fn write only to per-index slots so the result is independent of
/// scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         bool parallel = true) {
    if (n == 0) return;
    std::size_t workers = parallel ? std::thread::hardware_concurrency() : 1;
    if (workers <= 1 || n < 2 * workers) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> threads;
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace multistop
