#pragma once

#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace fad {

// Fixed pool of workers used for the embarrassingly parallel sweeps (factor
// counts, simulation replicates). run_indexed executed from inside a worker
// falls back to inline execution, so nested sweeps cannot deadlock and
// per-task work stays deterministic.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    threads = threads < 1 ? 1 : threads;
    for (int i = 0; i < threads; ++i) {
      workers_.emplace_back([this] {
        inside_worker() = true;
        for (;;) {
          std::function<void()> task;
          {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
            if (stop_ && tasks_.empty()) return;
            task = std::move(tasks_.front());
            tasks_.pop();
          }
          task();
        }
      });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  int size() const { return static_cast<int>(workers_.size()); }

  // Runs fn(0..count-1), blocking until all complete. The first exception
  // thrown by any task is rethrown here after the batch drains.
  void run_indexed(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (size() <= 1 || inside_worker()) {
      for (int i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<int> remaining{count};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::condition_variable done_cv;
    std::mutex done_mu;
    for (int i = 0; i < count; ++i) {
      std::function<void()> task = [&, i] {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
        if (remaining.fetch_sub(1) == 1) {
          std::lock_guard lock(done_mu);
          done_cv.notify_all();
        }
      };
      {
        std::lock_guard lock(mu_);
        tasks_.push(std::move(task));
      }
      cv_.notify_one();
    }
    std::unique_lock lock(done_mu);
    done_cv.wait(lock, [&] { return remaining.load() == 0; });
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  static bool& inside_worker() {
    thread_local bool flag = false;
    return flag;
  }

  std::vector<std::thread> workers_;
  std::queue<std::function<void()>> tasks_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
};

}  // namespace fad
