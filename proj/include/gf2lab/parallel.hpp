#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace gf2lab {

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Splits [0, total) into `workers` contiguous chunks and runs
/// fn(begin, end, chunk) on each; chunk c always covers the same range for a
/// given (total, workers), so per-chunk results merged in chunk order are
/// deterministic. Rethrows the first exception by chunk index.
template <class Fn>
void parallel_for_ranges(std::uint64_t total, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || total < 2) {
        fn(std::uint64_t{0}, total, 0u);
        return;
    }
    const std::uint64_t chunks = std::min<std::uint64_t>(workers, total);
    std::vector<std::exception_ptr> errors(chunks);
    std::vector<std::thread> threads;
    threads.reserve(chunks);
    for (std::uint64_t c = 0; c < chunks; ++c) {
        const std::uint64_t b = total * c / chunks, e = total * (c + 1) / chunks;
        threads.emplace_back([&, b, e, c] {
            try {
                fn(b, e, static_cast<unsigned>(c));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

/// Number of chunks parallel_for_ranges will use.
inline unsigned chunk_count(std::uint64_t total, unsigned workers) {
    workers = std::max(1u, workers);
    if (workers == 1 || total < 2) return 1;
    return static_cast<unsigned>(std::min<std::uint64_t>(workers, total));
}

}  // namespace gf2lab
