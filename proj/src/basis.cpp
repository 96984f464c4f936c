#include "xysim/basis.hpp"

#include <limits>

namespace xysim {

BinomialTable::BinomialTable() : c_(65 * 65, 0) {
  for (int n = 0; n <= 64; ++n) {
    c_[n * 65 + 0] = 1;
    for (int k = 1; k <= n; ++k)
      c_[n * 65 + k] = c_[(n - 1) * 65 + k - 1] + (k <= n - 1 ? c_[(n - 1) * 65 + k] : 0);
  }
}

const BinomialTable& BinomialTable::get() {
  static const BinomialTable table;
  return table;
}

SectorBasis::SectorBasis(int n_q, int m, uint64_t unrank_table_threshold)
    : n_q_(n_q), m_(m), binom_(&BinomialTable::get()) {
  if (n_q < 1 || n_q > 64)
    throw std::invalid_argument("SectorBasis: n_q must be in [1, 64], got " + std::to_string(n_q));
  if (m < 0 || m > n_q)
    throw std::invalid_argument("SectorBasis: excitation count " + std::to_string(m) +
                                " outside [0, " + std::to_string(n_q) + "]");
  dim_ = (*binom_)(n_q, m);
  // State vectors are addressed with signed 64-bit indices and must fit in
  // memory as complex<double> arrays; 2^40 amplitudes is far past that.
  if (dim_ > (1ULL << 40))
    throw std::invalid_argument("SectorBasis: dimension " + std::to_string(dim_) +
                                " exceeds the 2^40 addressable-amplitude limit");
  if (dim_ <= unrank_table_threshold && dim_ > 0) {
    unrank_table_.reserve(dim_);
    uint64_t s = first();
    for (uint64_t i = 0; i < dim_; ++i) {
      unrank_table_.push_back(s);
      if (i + 1 < dim_) s = next_config(s);
    }
  }
}

uint64_t SectorBasis::rank(uint64_t bits) const {
  if (std::popcount(bits) != m_)
    throw std::invalid_argument("SectorBasis::rank: bitstring has Hamming weight " +
                                std::to_string(std::popcount(bits)) + ", expected " +
                                std::to_string(m_));
  const auto& C = *binom_;
  uint64_t r = 0;
  int k = 1;
  uint64_t s = bits;
  while (s) {
    const int p = std::countr_zero(s);
    s &= s - 1;
    r += C(p, k);
    ++k;
  }
  return r;
}

uint64_t SectorBasis::unrank(uint64_t index) const {
  if (index >= dim_) throw std::out_of_range("SectorBasis::unrank: index past dimension");
  if (!unrank_table_.empty()) return unrank_table_[index];
  const auto& C = *binom_;
  uint64_t bits = 0;
  uint64_t r = index;
  int p = n_q_ - 1;
  for (int k = m_; k >= 1; --k) {
    while (C(p, k) > r) --p;
    bits |= 1ULL << p;
    r -= C(p, k);
    --p;
  }
  return bits;
}

std::shared_ptr<const SectorBasis> enumerate_sector(int n_q, int m) {
  return std::make_shared<SectorBasis>(n_q, m);
}

}  // namespace xysim
