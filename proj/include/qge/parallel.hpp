#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qge {

/// Thread cap for parallel maps. 0 means hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

namespace detail {
// Set inside worker threads so nested maps run inline.
inline thread_local bool in_parallel_worker = false;
} // namespace detail

/// Evaluates fn(i) for i in [0, count) and returns results in index order.
/// Work is split into contiguous chunks, so reductions done by the caller
/// over the returned vector are identical for any thread count.
template <class R>
std::vector<R> parallel_map(std::size_t count, const std::function<R(std::size_t)>& fn) {
    std::vector<R> out(count);
    unsigned workers = thread_count();
    if (workers <= 1 || count <= 1 || detail::in_parallel_worker) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = fn(i);
        return out;
    }
    if (workers > count)
        workers = static_cast<unsigned>(count);

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = count * w / workers;
        std::size_t hi = count * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            detail::in_parallel_worker = true;
            try {
                for (std::size_t i = lo; i < hi; ++i)
                    out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
    return out;
}

} // namespace qge
