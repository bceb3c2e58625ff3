#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gridtwin {

// Fork-join pool with static chunking. Nested calls run inline, so results
// never depend on the thread count.
class Executor {
public:
    explicit Executor(int threads = 1);
    ~Executor();
    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    int threads() const { return static_cast<int>(workers_.size()) + 1; }
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

private:
    void worker_loop(int index);
    void run_chunk(int chunk);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_cv_, done_cv_;
    const std::function<void(std::size_t)>* body_ = nullptr;
    std::size_t count_ = 0;
    unsigned long generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
    std::vector<std::exception_ptr> errors_;
};

} // namespace gridtwin
