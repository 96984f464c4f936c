#include "xysim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace xysim {

namespace {
int g_threads = 0;  // 0 = use hardware concurrency
constexpr int64_t kChunk = 1 << 15;
}  // namespace

void set_num_threads(int n) { g_threads = n < 0 ? 0 : n; }

int num_threads() {
  if (g_threads > 0) return g_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

int chunk_count(int64_t n) { return static_cast<int>((n + kChunk - 1) / kChunk); }

void parallel_for_chunked(int64_t n, const std::function<void(int64_t, int64_t, int)>& fn) {
  if (n <= 0) return;
  const int chunks = chunk_count(n);
  const int workers = std::min<int>(num_threads(), chunks);
  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c)
      fn(c * kChunk, std::min<int64_t>(n, (c + 1) * kChunk), c);
    return;
  }
  std::atomic<int> next{0};
  auto body = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= chunks) return;
      fn(c * kChunk, std::min<int64_t>(n, (c + 1) * kChunk), c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

double parallel_reduce_sum(int64_t n, const std::function<double(int64_t, int64_t)>& chunk_sum) {
  if (n <= 0) return 0.0;
  std::vector<double> partial(chunk_count(n), 0.0);
  parallel_for_chunked(n, [&](int64_t b, int64_t e, int c) { partial[c] = chunk_sum(b, e); });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace xysim
