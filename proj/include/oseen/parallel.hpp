#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace oseen {

/// Worker count: hardware concurrency capped by the OSEEN_THREADS env var.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("OSEEN_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

/// Run fn(chunk_index, begin, end) over fixed-size chunks of [0, n).
/// Chunk boundaries do not depend on the worker count, so per-chunk results
/// merged in chunk order are deterministic for any thread count.
template <typename Fn>
void for_chunks(int n, int chunk_size, Fn&& fn) {
    if (n <= 0) return;
    const int n_chunks = (n + chunk_size - 1) / chunk_size;
    const int workers = std::min(worker_count(), n_chunks);
    if (workers <= 1) {
        for (int c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int c = w; c < n_chunks; c += workers)
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace oseen
