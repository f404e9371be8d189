#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stagpoly {

/// Worker count; 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested)
{
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs body(begin, end, chunk) over contiguous chunks of [0, n). Chunk c always
/// covers the same index range for a fixed thread count, so callers that merge
/// per-chunk buffers in chunk order get schedule-independent results.
/// The first exception thrown by any chunk is rethrown on the calling thread.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
    if (workers == 1) {
        body(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t per = (n + workers - 1) / workers;
    for (std::size_t c = 0; c < workers; ++c) {
        const std::size_t begin = std::min(n, c * per);
        const std::size_t end = std::min(n, begin + per);
        pool.emplace_back([&, begin, end, c] {
            try {
                body(begin, end, c);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t n, unsigned threads)
{
    return std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
}

} // namespace stagpoly
