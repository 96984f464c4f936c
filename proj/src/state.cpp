#include "xysim/state.hpp"

#include <cmath>
#include <stdexcept>

#include "xysim/parallel.hpp"
#include "xysim/rng.hpp"

namespace xysim {

double StateVector::norm() const {
  const cplx* a = amp.data();
  const double n2 = parallel_reduce_sum(static_cast<int64_t>(amp.size()),
                                        [a](int64_t b, int64_t e) {
                                          double s = 0.0;
                                          for (int64_t i = b; i < e; ++i) s += std::norm(a[i]);
                                          return s;
                                        });
  return std::sqrt(n2);
}

void StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw std::runtime_error("StateVector::normalize: zero vector");
  const double inv = 1.0 / n;
  cplx* a = amp.data();
  parallel_for_chunked(static_cast<int64_t>(amp.size()),
                       [a, inv](int64_t b, int64_t e, int) {
                         for (int64_t i = b; i < e; ++i) a[i] *= inv;
                       });
}

cplx StateVector::overlap(const StateVector& other) const {
  if (!basis || !other.basis || !basis->same_sector(*other.basis))
    throw std::invalid_argument("StateVector::overlap: sector mismatch");
  const cplx* a = amp.data();
  const cplx* b = other.amp.data();
  const int64_t n = static_cast<int64_t>(amp.size());
  const double re = parallel_reduce_sum(n, [a, b](int64_t lo, int64_t hi) {
    double s = 0.0;
    for (int64_t i = lo; i < hi; ++i)
      s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
  });
  const double im = parallel_reduce_sum(n, [a, b](int64_t lo, int64_t hi) {
    double s = 0.0;
    for (int64_t i = lo; i < hi; ++i)
      s += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    return s;
  });
  return {re, im};
}

StateVector StateVector::basis_state(std::shared_ptr<const SectorBasis> b, uint64_t bits) {
  StateVector psi(std::move(b));
  psi.amp[psi.basis->rank(bits)] = 1.0;
  return psi;
}

StateVector StateVector::random_gaussian(std::shared_ptr<const SectorBasis> b, uint64_t seed) {
  StateVector psi(std::move(b));
  cplx* a = psi.amp.data();
  parallel_for_chunked(static_cast<int64_t>(psi.amp.size()),
                       [a, seed](int64_t lo, int64_t hi, int) {
                         for (int64_t i = lo; i < hi; ++i) {
                           double re, im;
                           normal_pair(hash_mix(seed, uint64_t(i), 0x67au),
                                       hash_mix(seed, uint64_t(i), 0x9c3u), re, im);
                           a[i] = cplx(re, im);
                         }
                       });
  psi.normalize();
  return psi;
}

}  // namespace xysim
