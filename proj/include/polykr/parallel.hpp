#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polykr::par {

// Process-wide worker cap. Parallel loops only ever write to disjoint,
// preallocated slots and all reductions run serially in index order, so
// results are bit-identical for any cap.

inline int& thread_cap() {
    static int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return cap;
}

inline void set_max_threads(int n) { thread_cap() = std::max(1, n); }
inline int max_threads() { return thread_cap(); }

// body(begin, end) on contiguous chunks.
template <class Body>
void parallel_for_chunks(std::size_t n, Body&& body) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mu;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// body(i) per index.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    parallel_for_chunks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) body(i);
    });
}

}  // namespace polykr::par
