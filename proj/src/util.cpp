#include "nonlocal/util.hpp"

#include <atomic>
#include <thread>

namespace nonlocal {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = std::min<std::size_t>(threads, count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace nonlocal
