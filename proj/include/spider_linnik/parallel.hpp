#pragma once

// Deterministic chunked Monte Carlo execution.
//
// Work is split into a fixed number of chunks regardless of thread count, and
// chunk i always draws from RandomSource(master_seed, stream_base + i), so an
// identity run produces identical numbers on 1 thread and on 16.  Results are
// returned in chunk order; callers merge them sequentially.

#include "rng.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace spider_linnik {

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

inline constexpr int kDefaultChunks = 64;

// Runs fn(chunk_index, chunk_n, rng) for each chunk and collects the results
// in chunk order.  threads <= 0 means hardware concurrency.
template <typename Result, typename Fn>
std::vector<Result> run_chunked(std::uint64_t n, std::uint64_t master_seed,
                                std::uint64_t stream_base, int threads, Fn&& fn,
                                int n_chunks = kDefaultChunks) {
    if (n_chunks < 1) n_chunks = 1;
    if (static_cast<std::uint64_t>(n_chunks) > n && n > 0)
        n_chunks = static_cast<int>(n);
    if (threads <= 0) threads = hardware_threads();
    if (threads > n_chunks) threads = n_chunks;

    std::vector<Result> results(static_cast<std::size_t>(n_chunks));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const int chunk = next.fetch_add(1);
            if (chunk >= n_chunks || failed.load()) return;
            const std::uint64_t chunk_n =
                n / n_chunks + (static_cast<std::uint64_t>(chunk) < n % n_chunks ? 1 : 0);
            RandomSource rng(master_seed, stream_base + static_cast<std::uint64_t>(chunk));
            try {
                results[static_cast<std::size_t>(chunk)] =
                    fn(chunk, chunk_n, rng);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) std::rethrow_exception(error);
    return results;
}

}  // namespace spider_linnik
