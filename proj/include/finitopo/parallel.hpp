#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace finitopo {

/// Worker count: hardware concurrency, capped by FINITOPO_THREADS when set.
inline int worker_count() {
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("FINITOPO_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (...) {
        }
    }
    return n;
}

/// Runs body(i) for i in [0, count). Each index is written by exactly one
/// worker, so results stored per index are independent of the schedule.
/// The body must not throw.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    const int workers = std::min<int>(worker_count(), static_cast<int>(std::max<std::size_t>(1, count / 64)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(64);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + 64);
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

}  // namespace finitopo
