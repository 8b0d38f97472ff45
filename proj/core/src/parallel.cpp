#include "fraclab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "fraclab/common.hpp"

namespace fraclab {

int worker_count() {
    if (const char* env = std::getenv("FRACLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(worker_count(), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                fn(b);
            }
        });
    }
    for (auto& t : pool) t.join();
}

double parallel_reduce_blocks(std::size_t n_blocks, const std::function<double(std::size_t)>& block_value) {
    std::vector<double> partial(n_blocks, 0.0);
    parallel_for_blocks(n_blocks, [&](std::size_t b) { partial[b] = block_value(b); });
    KahanSum acc;
    for (double v : partial) acc.add(v);
    return acc.value();
}

}  // namespace fraclab
