#include "driftblend/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dblend {

namespace {

std::atomic<int> g_workers{0};

int detect_workers() {
    if (const char* env = std::getenv("DRIFTBLEND_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int worker_count() {
    int n = g_workers.load(std::memory_order_relaxed);
    if (n == 0) {
        n = detect_workers();
        g_workers.store(n, std::memory_order_relaxed);
    }
    return n;
}

void set_worker_count(int n) { g_workers.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    const int workers = std::min<size_t>(worker_count(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        const size_t begin = w * chunk;
        const size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dblend
