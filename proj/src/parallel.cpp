#include "epred/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace epred {

namespace {

// Below this many iterations thread start-up costs more than the loop.
constexpr std::size_t kMinParallelWork = 1024;

int initial_thread_count() {
    if (const char* env = std::getenv("EPRED_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

std::atomic<int>& threads() {
    static std::atomic<int> n{initial_thread_count()};
    return n;
}

}  // namespace

int thread_count() { return threads().load(); }

void set_thread_count(int n) { threads().store(std::max(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const auto workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || n < kMinParallelWork) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, &body, &failure, &failure_mutex] {
                try {
                    for (std::size_t i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace epred
