#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace zinpaint {

// Worker pool with a prioritized job queue: jobs with the smallest priority
// value run first (callers use the query-to-region distance, so near regions
// are traversed before far ones regardless of insertion order). The thread
// that calls help_until_idle participates in draining the queue, so a pool
// built for N workers holds N-1 background threads.
class priority_pool {
public:
    explicit priority_pool(unsigned background_threads);
    ~priority_pool();

    priority_pool(const priority_pool&) = delete;
    priority_pool& operator=(const priority_pool&) = delete;

    void submit(std::uint64_t priority, std::function<void()> fn);

    // Runs queued jobs on the calling thread until the queue is empty and no
    // job is executing anywhere. Jobs may submit further jobs.
    void help_until_idle();

    unsigned background_threads() const { return static_cast<unsigned>(threads_.size()); }

private:
    struct item {
        std::uint64_t priority;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator<(const item& o) const {
            // std::priority_queue pops the largest element; invert so the
            // smallest (priority, seq) pair runs first.
            if (priority != o.priority) return priority > o.priority;
            return seq > o.seq;
        }
    };

    void worker_loop();
    bool run_one(std::unique_lock<std::mutex>& lock);

    std::mutex mx_;
    std::condition_variable work_cv_;
    std::condition_variable idle_cv_;
    std::priority_queue<item> queue_;
    std::uint64_t seq_ = 0;
    int in_flight_ = 0;
    bool stop_ = false;
    std::vector<std::thread> threads_;
};

}  // namespace zinpaint
