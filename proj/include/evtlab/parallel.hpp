#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace evtlab {

/// Thread-count knob. Work is always split into the same fixed-size chunks and
/// partial results are combined in chunk order, so the thread count never
/// changes a result.
struct Exec {
  unsigned threads{1};
  std::uint64_t chunk{256};
};

[[nodiscard]] inline std::uint64_t chunk_count(std::uint64_t total, std::uint64_t chunk) noexcept {
  return chunk == 0 ? 0 : (total + chunk - 1) / chunk;
}

/// Calls fn(chunk_index, begin, end) for every chunk of [0, total). If any
/// call throws, the exception from the lowest chunk index is rethrown after
/// all workers have stopped.
template <class Fn>
void parallel_for_chunks(std::uint64_t total, const Exec& exec, Fn&& fn) {
  const std::uint64_t chunk = std::max<std::uint64_t>(exec.chunk, 1);
  const std::uint64_t chunks = chunk_count(total, chunk);
  if (chunks == 0) return;
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::uint64_t> next{0};
  // Chunks above the lowest failing index are skipped; chunks below it still
  // run, so the reported error does not depend on scheduling.
  std::atomic<std::uint64_t> first_failed{chunks};

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) return;
      if (c > first_failed.load(std::memory_order_relaxed)) continue;
      try {
        fn(c, c * chunk, std::min(total, (c + 1) * chunk));
      } catch (...) {
        errors[c] = std::current_exception();
        auto seen = first_failed.load(std::memory_order_relaxed);
        while (c < seen && !first_failed.compare_exchange_weak(seen, c)) {
        }
      }
    }
  };

  const auto threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(exec.threads, 1U), chunks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace evtlab
