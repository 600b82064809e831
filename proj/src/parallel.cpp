#include "kacov/parallel.hpp"

#include "kacov/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace kacov {
namespace {

std::atomic<std::size_t> worker_override{0};
thread_local bool inside_worker = false;

}  // namespace

std::size_t configured_workers() {
  if (const std::size_t w = worker_override.load(); w > 0) return w;
  if (const char* env = std::getenv("KACOV_THREADS"); env != nullptr) {
    const std::string_view text(env);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
      throw Error(ErrorCode::InputError,
                  "KACOV_THREADS must be a positive integer, got '" + std::string(text) + "'");
    }
    return value;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_worker_override(std::size_t workers) { worker_override.store(workers); }

void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn,
                  std::size_t workers) {
  if (begin >= end) return;
  if (workers == 0) workers = configured_workers();
  workers = std::min(workers, end - begin);
  if (workers <= 1 || inside_worker) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{begin};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::size_t first_error_index = end;
  std::mutex error_mutex;

  auto body = [&] {
    inside_worker = true;
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= end) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
        failed = true;
      }
    }
    inside_worker = false;
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kacov
