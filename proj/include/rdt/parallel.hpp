#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rdt {

/// Worker cap shared by all parallel loops. 0 means "hardware concurrency".
/// The CLI sets this from --threads / RDT_THREADS.
inline int& thread_cap() {
    static int cap = 0;
    return cap;
}

inline int effective_threads(int requested = 0) {
    int cap = requested > 0 ? requested : thread_cap();
    unsigned hw = std::thread::hardware_concurrency();
    int n = cap > 0 ? cap : static_cast<int>(hw ? hw : 1);
    return std::max(1, n);
}

/// Runs f(i) for i in [begin, end). Work is dealt in contiguous chunks via an
/// atomic counter; every index is processed exactly once, so results are
/// identical for any worker count as long as f writes disjoint state per i.
template <typename F>
void parallel_for(int begin, int end, F&& f, int requested_threads = 0) {
    int n = end - begin;
    if (n <= 0) return;
    int workers = std::min(effective_threads(requested_threads), n);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) f(i);
        return;
    }
    std::atomic<int> next{begin};
    int chunk = std::max(1, n / (workers * 8));
    auto body = [&]() {
        for (;;) {
            int i0 = next.fetch_add(chunk);
            if (i0 >= end) return;
            int i1 = std::min(end, i0 + chunk);
            for (int i = i0; i < i1; ++i) f(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

}  // namespace rdt
