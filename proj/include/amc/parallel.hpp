#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace amc {

/// Worker count from the hardware, never zero.
inline unsigned default_jobs()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(begin, end) over disjoint chunks covering [0, count) from up
/// to `jobs` threads. Chunks are claimed dynamically; callers must make the
/// result independent of which thread ran which chunk. The first exception
/// thrown by any chunk is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned jobs, Body&& body)
{
    if (count == 0)
        return;
    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        body(std::uint64_t{0}, count);
        return;
    }
    std::uint64_t chunk = std::max<std::uint64_t>(1, count / (std::uint64_t{jobs} * 16));
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            std::uint64_t begin = next.fetch_add(chunk);
            if (begin >= count)
                return;
            try {
                body(begin, std::min(count, begin + chunk));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };

    std::vector<std::thread> threads;
    unsigned spawn = static_cast<unsigned>(std::min<std::uint64_t>(jobs, (count + chunk - 1) / chunk));
    threads.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

}  // namespace amc
