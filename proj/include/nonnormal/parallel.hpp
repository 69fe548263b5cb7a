#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace nonnormal {

inline unsigned resolve_threads(unsigned requested)
{
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Calls f(i) for i in [0, count) on a pool of threads. Work is claimed
// dynamically; callers write results by index so the output never depends
// on the schedule. The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f)
{
    threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::size_t> error_index(threads, std::numeric_limits<std::size_t>::max());
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    if (i < error_index[w]) {
                        error_index[w] = i;
                        errors[w] = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::exception_ptr first;
    for (unsigned w = 0; w < threads; ++w)
        if (errors[w] && error_index[w] < best) {
            best = error_index[w];
            first = errors[w];
        }
    if (first) std::rethrow_exception(first);
}

} // namespace nonnormal
