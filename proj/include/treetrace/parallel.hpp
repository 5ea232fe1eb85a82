#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace treetrace {

// Worker count: TREETRACE_WORKERS if set, otherwise hardware concurrency.
inline int default_worker_count() {
    if (const char* env = std::getenv("TREETRACE_WORKERS")) {
        const int workers = std::atoi(env);
        if (workers >= 1) return workers;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count) across `workers` threads. Work items are
// handed out by atomic counter; callers must write results keyed by index so
// scheduling cannot change the outcome.
inline void parallel_for_index(std::size_t count, int workers,
                               const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    const auto spawn = static_cast<std::size_t>(workers) < count
                           ? static_cast<std::size_t>(workers)
                           : count;
    pool.reserve(spawn);
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    for (std::size_t w = 0; w < spawn; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace treetrace
