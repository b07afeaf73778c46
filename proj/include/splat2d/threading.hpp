#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace splat2d {

// Runs fn(block_index) for block_index in [0, num_blocks). Blocks are handed
// out through an atomic counter; the block decomposition is fixed by the
// caller, so results must not depend on which worker ran which block.
template <typename Fn>
void parallel_for_blocks(std::size_t num_blocks, int threads, Fn&& fn) {
    if (threads <= 1 || num_blocks <= 1) {
        for (std::size_t b = 0; b < num_blocks; ++b) fn(b);
        return;
    }
    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(threads), num_blocks));
    std::atomic<std::size_t> counter{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = counter.fetch_add(1);
                if (b >= num_blocks) break;
                fn(b);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace splat2d
