#include "gridtwin/executor.hpp"

namespace gridtwin {

namespace {
thread_local bool inside_parallel = false;
}

Executor::Executor(int threads) {
    const int extra = threads > 1 ? threads - 1 : 0;
    for (int i = 0; i < extra; ++i) workers_.emplace_back([this, i] { worker_loop(i + 1); });
}

Executor::~Executor() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& w : workers_) w.join();
}

void Executor::run_chunk(int chunk) {
    const std::size_t parts = static_cast<std::size_t>(threads());
    const std::size_t begin = count_ * static_cast<std::size_t>(chunk) / parts;
    const std::size_t end = count_ * static_cast<std::size_t>(chunk + 1) / parts;
    inside_parallel = true;
    try {
        for (std::size_t i = begin; i < end; ++i) (*body_)(i);
    } catch (...) {
        errors_[static_cast<std::size_t>(chunk)] = std::current_exception();
    }
    inside_parallel = false;
}

void Executor::worker_loop(int index) {
    unsigned long seen = 0;
    for (;;) {
        {
            std::unique_lock<std::mutex> lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        run_chunk(index);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (--pending_ == 0) done_cv_.notify_one();
        }
    }
}

void Executor::parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (workers_.empty() || inside_parallel || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    errors_.assign(static_cast<std::size_t>(threads()), nullptr);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        body_ = &body;
        count_ = n;
        pending_ = static_cast<int>(workers_.size());
        ++generation_;
    }
    start_cv_.notify_all();
    run_chunk(0);
    {
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
    }
    // Lowest chunk wins so the reported error is deterministic.
    for (auto& e : errors_)
        if (e) std::rethrow_exception(e);
}

} // namespace gridtwin
