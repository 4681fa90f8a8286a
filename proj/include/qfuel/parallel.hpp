#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace qfuel {

inline unsigned default_thread_count() {
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

template <class Acc, class Fn>
Acc pairwise(std::uint64_t lo, std::uint64_t hi, Fn& fn) {
    if (hi - lo == 1) return fn(lo);
    const std::uint64_t mid = lo + (hi - lo) / 2;
    return pairwise<Acc>(lo, mid, fn) + pairwise<Acc>(mid, hi, fn);
}

template <class Acc>
Acc pairwise_blocks(const std::vector<Acc>& blocks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return blocks[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_blocks(blocks, lo, mid) + pairwise_blocks(blocks, mid, hi);
}

}  // namespace detail

// Maps fn over trajectory indices [0, count) and sums the results with a
// fixed pairwise tree. The tree depends only on count, never on the number
// of workers, so the result is bit-identical for any thread count.
//
// Acc must be default-constructible (the empty sum) and provide operator+.
template <class Acc, class Fn>
Acc reduce_trajectories(std::uint64_t count, unsigned threads, Fn fn) {
    if (count == 0) return Acc{};
    constexpr std::uint64_t kBlock = 1024;
    const std::uint64_t n_blocks = (count + kBlock - 1) / kBlock;
    std::vector<Acc> blocks(n_blocks);

    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t b = next++; b < n_blocks; b = next++) {
            const std::uint64_t lo = b * kBlock;
            const std::uint64_t hi = std::min(count, lo + kBlock);
            blocks[b] = detail::pairwise<Acc>(lo, hi, fn);
        }
    };

    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), n_blocks));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }
    return detail::pairwise_blocks(blocks, 0, blocks.size());
}

}  // namespace qfuel
