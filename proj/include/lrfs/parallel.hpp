#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrfs {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; the first exception thrown is rethrown here.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1U, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&]() {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(std::min(workers, count) - 1);
    for (std::size_t w = 1; w < std::min(workers, count); ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& thread : pool) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace lrfs
