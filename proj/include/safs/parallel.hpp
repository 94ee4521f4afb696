#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace safs {

// Runs task(i) for i in [0, count) on at most `workers` threads. Tasks write
// their results into caller-owned slots indexed by i, so the outcome does not
// depend on the worker count. The first exception thrown (lowest index) is
// rethrown after all threads join.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;

    auto loop = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
    loop();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace safs
