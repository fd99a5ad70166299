#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gyrolim {

// process-wide worker count for data-parallel loops (set from the CLI --jobs)
inline std::atomic<int>& worker_count() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_worker_count(int n) { worker_count().store(std::max(1, n)); }

// Static block partition of [0, count). Each index is processed exactly once
// by a deterministic owner, so results do not depend on the thread count as
// long as the body writes only to its own index.
template <class Fn>
void parallel_for(std::size_t count, Fn&& body) {
    const int threads = std::min<std::size_t>(worker_count().load(), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([lo, hi, &body, &errors, t] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace gyrolim
