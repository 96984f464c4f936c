#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace xysim {

// Worker-count control. The chunk grid is a function of the problem size
// only, so results (including floating-point reduction order) are identical
// for any thread count.
void set_num_threads(int n);
int num_threads();

// Calls fn(begin, end, chunk_index) over a fixed chunk grid. Chunks are
// disjoint; fn bodies must only write state owned by their chunk.
void parallel_for_chunked(int64_t n, const std::function<void(int64_t, int64_t, int)>& fn);

int chunk_count(int64_t n);

// Deterministic sum: per-chunk partials combined in chunk order.
double parallel_reduce_sum(int64_t n, const std::function<double(int64_t, int64_t)>& chunk_sum);

}  // namespace xysim
