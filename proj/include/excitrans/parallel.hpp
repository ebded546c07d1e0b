#ifndef EXCITRANS_PARALLEL_HPP
#define EXCITRANS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace excitrans {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; if several calls throw, the exception of the lowest index
/// is rethrown, so failures are reported the same way at any thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) body(i);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace excitrans

#endif  // EXCITRANS_PARALLEL_HPP
