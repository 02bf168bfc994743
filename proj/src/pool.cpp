#include "zinpaint/pool.hpp"

#include <utility>

namespace zinpaint {

priority_pool::priority_pool(unsigned background_threads) {
    threads_.reserve(background_threads);
    for (unsigned i = 0; i < background_threads; ++i) {
        threads_.emplace_back([this] { worker_loop(); });
    }
}

priority_pool::~priority_pool() {
    {
        std::lock_guard<std::mutex> lk(mx_);
        stop_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void priority_pool::submit(std::uint64_t priority, std::function<void()> fn) {
    {
        std::lock_guard<std::mutex> lk(mx_);
        queue_.push(item{priority, seq_++, std::move(fn)});
        ++in_flight_;
    }
    work_cv_.notify_one();
    idle_cv_.notify_all();  // helpers block on idle_cv_ and must see new work
}

bool priority_pool::run_one(std::unique_lock<std::mutex>& lock) {
    if (queue_.empty()) return false;
    auto fn = std::move(const_cast<item&>(queue_.top()).fn);
    queue_.pop();
    lock.unlock();
    fn();
    lock.lock();
    if (--in_flight_ == 0) idle_cv_.notify_all();
    return true;
}

void priority_pool::help_until_idle() {
    std::unique_lock<std::mutex> lk(mx_);
    while (in_flight_ > 0) {
        if (!run_one(lk)) {
            idle_cv_.wait(lk, [this] { return in_flight_ == 0 || !queue_.empty(); });
        }
    }
}

void priority_pool::worker_loop() {
    std::unique_lock<std::mutex> lk(mx_);
    for (;;) {
        if (stop_) return;
        if (!run_one(lk)) {
            work_cv_.wait(lk, [this] { return stop_ || !queue_.empty(); });
        }
    }
}

}  // namespace zinpaint
