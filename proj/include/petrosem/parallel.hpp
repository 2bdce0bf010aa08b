#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace petrosem {

/// Worker count: PETROSEM_THREADS when set, else hardware concurrency.
inline int thread_budget() {
    if (const char* env = std::getenv("PETROSEM_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

/// Runs body(i) for i in [0, count) on up to thread_budget() threads.
/// Callers own all result buffers (indexed writes only), so reductions
/// stay deterministic.
inline void parallel_for(long long count, const std::function<void(long long)>& body) {
    int workers = thread_budget();
    if (workers <= 1 || count < 2) {
        for (long long i = 0; i < count; ++i) body(i);
        return;
    }
    if (workers > count) workers = static_cast<int>(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (long long i = w; i < count; i += workers) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace petrosem
