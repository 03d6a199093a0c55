#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace rcla::detail {

/// Calls fn(lo, hi) on contiguous blocks of [0, count) from `workers` threads.
template <class Fn>
void run_partitioned(long count, int workers, Fn&& fn) {
    workers = static_cast<int>(std::min<long>(workers, count));
    if (workers <= 1) {
        fn(0L, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long chunk = (count + workers - 1) / workers;
    for (int k = 0; k < workers; ++k) {
        const long lo = k * chunk;
        const long hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rcla::detail
