#ifndef TRAJSEL_PARALLEL_HPP
#define TRAJSEL_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace trajsel {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads (0: hardware count).
/// Work items must be independent; results keyed by index stay
/// deterministic under any schedule. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (n == 0) return;
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));

  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace trajsel

#endif
