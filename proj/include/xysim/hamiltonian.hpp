#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "xysim/lattice.hpp"
#include "xysim/state.hpp"

namespace xysim {

// Angular frequency units: rad/ns. Paper-style couplings are quoted as
// f = omega/(2*pi) in MHz.
inline double mhz_to_radns(double f_mhz) { return 6.283185307179586476925286766559e-3 * f_mhz; }

// Projected spin Hamiltonian on a sector:
//   H = sum_i w_i n_i
//     + sum_<ij> g_ij (X_i X_j + Y_i Y_j)/2
//     + sum_<ij> gnn_ij n_i n_j
//     + sum_<ijk> (gxnx_ijk n_j + gxix_ijk)(X_i X_k + Y_i Y_k)/2
//     + sum_<ijk> gnxx_ijk [n_i (X_j X_k + Y_j Y_k) + n_k (X_i X_j + Y_i Y_j)]/2
// Triples are the lattice's canonical (i, j, k) paths with i < k; the xnx/xix
// coefficients are totals for the path (the reversed traversal is the same
// operator), while gnxx applies the density factor at either end once each.
struct SpinHamiltonian {
  std::shared_ptr<const Lattice> lattice;
  std::vector<double> onsite;      // per site
  std::vector<double> hop;         // per bond
  std::vector<double> nn_density;  // per bond
  struct TripleCoeff {
    double xnx = 0.0;
    double xix = 0.0;
    double nxx = 0.0;
  };
  std::vector<TripleCoeff> triples;

  explicit SpinHamiltonian(std::shared_ptr<const Lattice> lat);
  SpinHamiltonian() = default;

  void validate() const;
  bool has_offdiag_occupancy_terms() const;

  // a*A + b*B over a shared lattice.
  static SpinHamiltonian linear_combination(double a, const SpinHamiltonian& A, double b,
                                            const SpinHamiltonian& B);

  // Tab-separated term table: kind, site ids, coefficient.
  std::string dump_terms() const;
};

// Pure hopping sum H_XY = sum_<ij> (X_i X_j + Y_i Y_j)/2 with n_B bonds and
// the g_m normalization used for dimensionless energy densities.
struct XYEnergyObservable {
  std::shared_ptr<const Lattice> lattice;
  double g_m = 1.0;  // rad/ns, normalization only
  int n_bonds() const { return lattice->n_bonds(); }
  SpinHamiltonian as_hamiltonian() const;
};

// Piecewise-linear ramp: onsite field h(t) multiplies the staggered pattern,
// coupling knob g(t)/g_reference scales every coupling coefficient of the
// base template; base.onsite holds static (e.g. disorder) offsets.
struct RampSchedule {
  struct Waypoint {
    double t;  // ns
    double h;  // rad/ns staggered field amplitude
    double g;  // rad/ns coupling knob
  };
  SpinHamiltonian base;
  std::vector<Waypoint> waypoints;  // ascending t
  double g_reference = 1.0;

  double t_start() const { return waypoints.front().t; }
  double t_end() const { return waypoints.back().t; }
  std::array<double, 2> knobs_at(double t) const;  // (h, g)
};

SpinHamiltonian schedule_eval(const RampSchedule& s, double t);

// Compiled matrix-free application of H (or a ramp family sharing one term
// structure) on a sector basis. The diagonal is split as
//   diag = d_static + coupling_scale * d_coupling + field * d_pattern
// so a ramp can be evaluated at any (field, coupling) point without
// recompiling. Workers own disjoint output chunks; input is read-only.
class SectorMatvec {
 public:
  SectorMatvec(const SpinHamiltonian& h, std::shared_ptr<const SectorBasis> basis);
  // Ramp form: pattern is the per-site staggered pattern multiplied by h(t).
  SectorMatvec(const SpinHamiltonian& base, const std::vector<double>& pattern,
               std::shared_ptr<const SectorBasis> basis);

  const SectorBasis& basis() const { return *basis_; }

  // y = alpha * (H x) + add (add may be null; acc[r] += acc_coef * y[r] when
  // acc is non-null). Off-diagonal terms and d_coupling are multiplied by
  // coupling_scale; d_pattern by field.
  void apply_fused(const cplx* x, cplx* y, cplx alpha, const cplx* add, cplx* acc, cplx acc_coef,
                   double coupling_scale = 1.0, double field = 0.0) const;

  void apply(const StateVector& in, StateVector& out, double coupling_scale = 1.0,
             double field = 0.0) const;

  // <x|H|x> accumulated deterministically; imaginary part returned for checks.
  std::array<double, 2> expectation(const StateVector& x, double coupling_scale = 1.0,
                                    double field = 0.0) const;

  uint64_t matvec_count() const { return matvecs_; }

  // Extra constant added to the diagonal (spectral shift for Chebyshev).
  void set_diag_shift(double c) { diag_shift_ = c; }

 private:
  void compile(const SpinHamiltonian& h, const std::vector<double>* pattern);

  std::shared_ptr<const SectorBasis> basis_;
  std::vector<double> d_static_, d_coupling_, d_pattern_;
  struct Hop {
    uint8_t a, b, csite;
    uint8_t pad = 0;
    uint64_t between;
    double g0, g1;  // coefficient g0 + g1 * n_csite
  };
  std::vector<Hop> hops_;
  bool has_pattern_ = false;
  bool has_coupling_diag_ = false;
  double diag_shift_ = 0.0;
  mutable uint64_t matvecs_ = 0;
};

StateVector apply(const SpinHamiltonian& h, const StateVector& psi);
double expectation(const SpinHamiltonian& h, const StateVector& psi);
double expectation(const XYEnergyObservable& h_xy, const StateVector& psi);

// Interval guaranteed to contain the sector spectrum (Gershgorin-style row
// bound evaluated combinatorially; never enumerates the basis).
std::array<double, 2> bandwidth_bound(const SpinHamiltonian& h, int m_excitations);

}  // namespace xysim
