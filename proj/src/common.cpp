#include "firecast/common.hpp"

#include <thread>

namespace firecast {

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(count, threads < 1 ? 1 : static_cast<std::size_t>(threads));
    if (workers <= 1) {
        fn(0, count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace firecast
