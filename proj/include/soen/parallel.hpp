#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace soen {

/// Run fn(index) over [0, n) on `workers` threads with a static block
/// partition. Each index is visited exactly once; callers write results into
/// preallocated per-index slots, so the outcome is independent of scheduling.
inline void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(workers, n);
    std::vector<std::thread> threads;
    const std::size_t base = n / w, extra = n % w;
    std::size_t begin = 0;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t end = begin + base + (k < extra ? 1 : 0);
        threads.emplace_back([&, k, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace soen
