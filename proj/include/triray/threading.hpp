// Copyright 2026 The triray Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace triray {

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Splits [0, n) into exactly n_chunks contiguous ranges and runs
// fn(chunk_idx, begin, end) for each, using up to n_threads workers.
//
// The chunk decomposition depends only on (n, n_chunks), never on the thread
// count, and each chunk is processed by a single worker. Callers that
// accumulate into per-chunk buffers and fold them in chunk order therefore
// get results that are invariant to the number of threads.
inline void run_chunked(int64_t n, int n_chunks, int n_threads,
                        const std::function<void(int chunk, int64_t begin, int64_t end)>& fn) {
    if (n <= 0) return;
    if (n_chunks > n) n_chunks = static_cast<int>(n);
    if (n_chunks < 1) n_chunks = 1;
    if (n_threads < 1) n_threads = 1;
    if (n_threads > n_chunks) n_threads = n_chunks;

    auto chunk_range = [&](int c) {
        const int64_t begin = n * c / n_chunks;
        const int64_t end = n * (c + 1) / n_chunks;
        return std::pair<int64_t, int64_t>{begin, end};
    };

    if (n_threads == 1) {
        for (int c = 0; c < n_chunks; ++c) {
            auto [begin, end] = chunk_range(c);
            fn(c, begin, end);
        }
        return;
    }

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks) return;
            auto [begin, end] = chunk_range(c);
            fn(c, begin, end);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n_threads) - 1);
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace triray
