#include "spb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spb {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
    const int t = std::min(num_threads(), std::max(1, n));
    if (t <= 1) {
        if (n > 0) fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    workers.reserve(t);
    for (int w = 0; w < t; ++w) {
        const int begin = static_cast<int>(static_cast<long long>(n) * w / t);
        const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / t);
        workers.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

} // namespace spb
