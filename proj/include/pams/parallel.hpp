#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace pams {

/// Worker count: PAMS_OPT_THREADS when set (min 1), hardware concurrency
/// otherwise.
inline unsigned thread_count() {
    if (const char* env = std::getenv("PAMS_OPT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i in [0, n) over a fixed block partition. Results must be
/// written to per-index slots; the partition depends only on (n, workers), so
/// output is identical for any worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = thread_count()) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t n_workers = std::min<std::size_t>(workers, n);
    std::vector<std::exception_ptr> errors(n_workers);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / n_workers;
            const std::size_t hi = n * (w + 1) / n_workers;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace pams
