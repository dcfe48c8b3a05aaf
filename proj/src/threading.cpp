#include "bsgs/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace bsgs {

int thread_count() {
  static const int count = [] {
    if (const char* env = std::getenv("BSGS_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return count;
}

namespace {

thread_local bool inside_pool_work = false;

// Persistent pool; the calling thread participates, so a pool of size N
// spawns N-1 threads. Each run() publishes a shared Job that outlives the
// call on every thread that touched it.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool(thread_count());
    return pool;
  }

  void run(int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 0) return;
    if (threads_.empty() || jobs == 1 || inside_pool_work) {
      for (int i = 0; i < jobs; ++i) fn(i);
      return;
    }

    auto job = std::make_shared<Job>();
    job->fn = &fn;
    job->total = jobs;
    job->remaining.store(jobs, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      current_ = job;
      ++generation_;
    }
    cv_.notify_all();

    process(*job);

    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [&] { return job->remaining.load(std::memory_order_acquire) == 0; });
  }

 private:
  struct Job {
    const std::function<void(int)>* fn = nullptr;
    int total = 0;
    std::atomic<int> next{0};
    std::atomic<int> remaining{0};
  };

  explicit Pool(int size) {
    for (int i = 1; i < size; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void worker_loop() {
    uint64_t seen = 0;
    while (true) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = current_;
      }
      if (job) process(*job);
    }
  }

  void process(Job& job) {
    inside_pool_work = true;
    int finished = 0;
    while (true) {
      const int i = job.next.fetch_add(1, std::memory_order_relaxed);
      if (i >= job.total) break;
      (*job.fn)(i);
      ++finished;
    }
    inside_pool_work = false;
    if (finished > 0 &&
        job.remaining.fetch_sub(finished, std::memory_order_acq_rel) == finished) {
      std::lock_guard<std::mutex> lock(mutex_);
      done_cv_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::shared_ptr<Job> current_;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
  if (n == 0) return;
  // Chunk layout depends only on n, never on the worker count, so even
  // per-chunk reductions merged in chunk order stay bit-reproducible.
  const size_t chunks = std::min<size_t>(n, 64);
  const size_t base = n / chunks;
  const size_t rem = n % chunks;
  if (chunks == 1) {
    fn(0, n);
    return;
  }
  Pool::instance().run(static_cast<int>(chunks), [&](int c) {
    const size_t uc = static_cast<size_t>(c);
    const size_t begin = uc * base + std::min(uc, rem);
    const size_t end = begin + base + (uc < rem ? 1 : 0);
    fn(begin, end);
  });
}

}  // namespace bsgs
