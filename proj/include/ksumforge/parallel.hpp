#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ksumforge {

/// Thread count from an explicit request, then KSUMFORGE_THREADS, then the hardware.
unsigned resolve_threads(unsigned requested);

/// Calls fn(i) for every i in [0, n) on up to `threads` workers. Work is split
/// into contiguous blocks, so results written per index do not depend on the
/// schedule. The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ksumforge
