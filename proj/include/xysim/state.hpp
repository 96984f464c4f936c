#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "xysim/basis.hpp"

namespace xysim {

using cplx = std::complex<double>;

struct StateVector {
  std::shared_ptr<const SectorBasis> basis;
  std::vector<cplx> amp;

  StateVector() = default;
  explicit StateVector(std::shared_ptr<const SectorBasis> b)
      : basis(std::move(b)), amp(basis->dim(), cplx(0.0, 0.0)) {}

  uint64_t dim() const { return basis ? basis->dim() : 0; }

  double norm() const;
  void normalize();
  cplx overlap(const StateVector& other) const;  // <this|other>

  static StateVector basis_state(std::shared_ptr<const SectorBasis> b, uint64_t bits);
  // Gaussian random amplitudes, normalized; the Porter-Thomas reference state.
  static StateVector random_gaussian(std::shared_ptr<const SectorBasis> b, uint64_t seed);
};

}  // namespace xysim
