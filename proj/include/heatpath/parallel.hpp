#pragma once

// Replicate-level parallelism. Work items are indexed; each worker claims the
// next index atomically and writes into caller-preallocated slots, so results
// are ordered by index regardless of execution interleaving. HEATPATH_THREADS
// caps the pool (0 or unset means machine default).

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace heatpath::parallel {

inline unsigned thread_count() {
    if (const char* env = std::getenv("HEATPATH_THREADS")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned want = thread_count();
    if (n == 0) return;
    if (want <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(want, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace heatpath::parallel
