#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace msgd {

// Runs fn(chunk) for chunk = 0..n_chunks-1 on up to `threads` workers pulling
// from a shared atomic counter. Chunk decomposition is always a pure function
// of the problem (never of the thread count), and callers merge per-chunk
// results in chunk order, so outputs are bit-identical for any thread count.
template <class F>
void run_chunks(std::size_t n_chunks, int threads, F&& fn) {
    if (threads < 1) threads = 1;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n_chunks ? n_chunks : 1);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error = nullptr;
    std::atomic<bool> failed{false};
    std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks || failed.load()) break;
                try {
                    fn(c);
                } catch (...) {
                    if (!error_claimed.test_and_set()) first_error = std::current_exception();
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace msgd
