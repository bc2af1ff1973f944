#include "parallel.hpp"

#include <algorithm>
#include <mutex>

namespace swingmc::par {

namespace {
std::atomic<int> g_workers{0};

int effective_workers() {
    int w = g_workers.load(std::memory_order_relaxed);
    if (w <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        w = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return w;
}

void run_blocks(std::int64_t n_blocks, const std::function<void(std::int64_t)>& body) {
    int w = std::min<std::int64_t>(effective_workers(), n_blocks);
    if (w <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) body(b);
        return;
    }
    std::atomic<std::int64_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::int64_t b = cursor.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) return;
            try {
                body(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}
}  // namespace

void set_workers(int n) { g_workers.store(n, std::memory_order_relaxed); }

int workers() { return effective_workers(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    const std::int64_t block = std::max<std::int64_t>(1, n / (4 * effective_workers()));
    const std::int64_t n_blocks = (n + block - 1) / block;
    run_blocks(n_blocks, [&](std::int64_t b) {
        const std::int64_t lo = b * block;
        const std::int64_t hi = std::min(n, lo + block);
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
}

void parallel_chunks(std::int64_t n, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    const std::int64_t n_chunks = (n + chunk - 1) / chunk;
    run_blocks(n_chunks, [&](std::int64_t c) {
        const std::int64_t lo = c * chunk;
        const std::int64_t hi = std::min(n, lo + chunk);
        fn(c, lo, hi);
    });
}

}  // namespace swingmc::par
