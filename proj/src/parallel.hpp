#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tclfit::detail {

/// Runs fn(k, items[k]) for every k on up to `threads` threads. Callers write results by
/// index and reduce in a fixed order afterwards. The first exception is rethrown.
template <class Fn>
void parallel_for(const std::vector<std::size_t>& items, int threads, Fn fn) {
  const std::size_t n = items.size();
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k, items[k]);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < n; k += workers) fn(k, items[k]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tclfit::detail
