// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace gsdrop {

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Static row partition over [0, count). With threads <= 1 the body runs
/// inline, giving a bit-reproducible serial path. fn(chunk, begin, end).
inline void parallel_chunks(int count, int threads,
                            const std::function<void(int, int, int)>& fn) {
    if (threads <= 1 || count <= 1) {
        fn(0, 0, count);
        return;
    }
    const int n_chunks = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(n_chunks);
    for (int c = 0; c < n_chunks; ++c) {
        const int begin = static_cast<int>(int64_t(count) * c / n_chunks);
        const int end = static_cast<int>(int64_t(count) * (c + 1) / n_chunks);
        pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gsdrop
