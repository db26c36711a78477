#include "fibersense/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fibersense::core {
namespace {

std::atomic<std::size_t> g_jobs{0};

}  // namespace

void set_default_jobs(std::size_t jobs) { g_jobs = jobs; }

std::size_t default_jobs() {
  const std::size_t j = g_jobs.load();
  if (j > 0) return j;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t jobs) {
  if (n == 0) return;
  if (jobs == 0) jobs = default_jobs();
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::size_t begin = n * j / jobs;
    const std::size_t end = n * (j + 1) / jobs;
    workers.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fibersense::core
