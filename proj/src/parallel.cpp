#include "lmfg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lmfg {

int configured_threads() {
  if (const char* env = std::getenv("LMFG_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void parallel_chunks(int chunks, const std::function<void(int)>& fn, int threads) {
  if (threads <= 0) threads = configured_threads();
  threads = std::max(1, std::min(threads, chunks));
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int c = next++; c < chunks; c = next++) {
        try {
          fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(guard);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lmfg
