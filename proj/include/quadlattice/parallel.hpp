#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ql {

// process-wide worker count; 0 means "not set"
void set_threads(int n);
int threads();

// runs fn(i) for i in [0, n); each index writes only its own slot, so results are
// independent of the worker count
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads()), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::jthread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    }
    pool.clear();
    if (err) std::rethrow_exception(err);
}

}  // namespace ql
