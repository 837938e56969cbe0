#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace marginmine {

// Resolves a thread-count request: positive values pass through, anything
// else falls back to MARGIN_MINER_THREADS, then to hardware concurrency.
std::size_t resolve_threads(int requested);

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// worker. Workers must write only to disjoint, index-addressed slots so the
// result is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (n == 0) {
        return;
    }
    if (threads <= 1 || n == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t workers = threads < n ? threads : n;
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= n) {
            break;
        }
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(std::size_t{0}, chunk < n ? chunk : n);
    for (auto& t : pool) {
        t.join();
    }
}

} // namespace marginmine
