#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace xysim {

// Binomial coefficients C(n,k) for n <= 64. C(64,32) fits in a uint64.
class BinomialTable {
 public:
  static const BinomialTable& get();
  uint64_t operator()(int n, int k) const {
    if (k < 0 || n < 0 || k > n) return 0;
    return c_[n * 65 + k];
  }

 private:
  BinomialTable();
  std::vector<uint64_t> c_;
};

// Fixed-Hamming-weight computational basis with the combinatorial number
// system as the rank map. Bit i of a configuration is the occupation of
// site i; states are ordered by ascending integer value, which is exactly
// the colexicographic combination order realized by
//   rank(s) = sum_k C(pos_k, k+1)
// over the set-bit positions pos_0 < pos_1 < ... of s.
class SectorBasis {
 public:
  SectorBasis(int n_q, int m, uint64_t unrank_table_threshold = (1ULL << 20));

  int n_qubits() const { return n_q_; }
  int excitations() const { return m_; }
  uint64_t dim() const { return dim_; }

  uint64_t rank(uint64_t bits) const;
  uint64_t unrank(uint64_t index) const;

  // First configuration in the order (lowest m bits set).
  uint64_t first() const { return m_ == 0 ? 0 : ((m_ == 64) ? ~0ULL : ((1ULL << m_) - 1)); }

  // Successor in ascending integer order (Gosper's hack); only valid below
  // the last configuration.
  static uint64_t next_config(uint64_t s) {
    const uint64_t u = s & (~s + 1);
    const uint64_t v = s + u;
    return v | (((s ^ v) / u) >> 2);
  }

  bool same_sector(const SectorBasis& other) const {
    return n_q_ == other.n_q_ && m_ == other.m_;
  }

  // Signed rank offset between the two configurations connected by moving an
  // excitation across bit positions a < b; valid for any s with
  // n_a != n_b. If s has the excitation at a, its partner is at rank + delta,
  // otherwise at rank - delta. `between` must be the mask of bits strictly
  // between a and b.
  int64_t hop_delta(uint64_t s, int a, int b, uint64_t between) const {
    const auto& C = *binom_;
    int lo = std::popcount(s & ((1ULL << a) - 1));
    uint64_t mid = s & between;
    int64_t delta = -static_cast<int64_t>(C(a, lo + 1));
    int j = 1;
    while (mid) {
      const int p = std::countr_zero(mid);
      mid &= mid - 1;
      delta += static_cast<int64_t>(C(p, lo + j)) - static_cast<int64_t>(C(p, lo + j + 1));
      ++j;
    }
    delta += static_cast<int64_t>(C(b, lo + j));
    return delta;
  }

 private:
  int n_q_;
  int m_;
  uint64_t dim_;
  const BinomialTable* binom_;
  std::vector<uint64_t> unrank_table_;  // populated only for small sectors
};

std::shared_ptr<const SectorBasis> enumerate_sector(int n_q, int m);

}  // namespace xysim
