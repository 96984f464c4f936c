#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xysim/hamiltonian.hpp"

namespace xysim {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chebyshev expansion of exp(-iHt): the spectrum bound [e_min, e_max] maps
// H to h = (H - c)/W with W = e_max - e_min, and tau = t*W is the Bessel
// argument. Coefficients J_m(tau) decay super-exponentially past
// m* = (e/2)*tau.
struct ChebyshevPlan {
  double e_min = 0.0, e_max = 0.0;
  double t = 0.0;    // ns
  double tau = 0.0;  // t * (e_max - e_min)
  double tol = 1e-10;
  double m_star = 0.0;
  int coeff_cap = 0;          // 4*m_star + 100 unless overridden
  std::vector<double> bessel; // J_0 .. J_cap(tau)
  int m_trunc = 0;            // terms actually summed
};

ChebyshevPlan build_chebyshev_plan(const SpinHamiltonian& h, int m_excitations, double t,
                                   double tol = 1e-10, int cap_override = -1);

// Predicted matrix-vector applications, ceil((e/2)*tau), at least 1.
int64_t matvec_budget(const ChebyshevPlan& plan);

// Bessel J_0..J_max via the backward (Miller) recurrence with final
// normalization; stable in the super-exponential tail.
std::vector<double> bessel_j_array(double tau, int m_max);

struct EvolutionLogEntry {
  std::string kind;  // "chebyshev" | "rk45" | "cfm4"
  double t_from = 0.0, t_to = 0.0;
  double tau = 0.0;
  int64_t matvecs = 0;
  double wall_ms = 0.0;
  uint64_t dim = 0;
};

class EvolutionLog {
 public:
  void add(EvolutionLogEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<EvolutionLogEntry>& entries() const { return entries_; }
  int64_t total_matvecs() const;
  std::string csv() const;

 private:
  std::vector<EvolutionLogEntry> entries_;
};

struct ChebyshevResult {
  StateVector state;
  int64_t matvecs = 0;
  ChebyshevPlan plan;
};

ChebyshevResult evolve_chebyshev(const SpinHamiltonian& h, const StateVector& psi, double t,
                                 double tol = 1e-10, EvolutionLog* log = nullptr,
                                 int cap_override = -1);

// Consecutive segments through the given timestamps (ascending, from t=0),
// reusing the previous state at each step.
std::vector<StateVector> evolve_chebyshev_checkpoints(const SpinHamiltonian& h,
                                                      const StateVector& psi0,
                                                      const std::vector<double>& times,
                                                      double tol = 1e-10,
                                                      EvolutionLog* log = nullptr);

enum class RampIntegrator { rk45, cfm4 };

struct OdeControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double max_step = 1.0;           // ns
  double norm_drift_limit = 1e-8;  // renormalize below this, error above
  RampIntegrator integrator = RampIntegrator::rk45;
  double cfm_dt = 1.0;  // ns, fixed step of the commutator-free scheme
};

struct RampResult {
  std::vector<StateVector> checkpoints;
  int64_t matvecs = 0;
  int64_t steps = 0;
};

// Time-dependent Schrodinger integration over the schedule, reporting the
// state at each requested checkpoint time (hit exactly by step clamping).
RampResult evolve_ramp(const RampSchedule& s, const StateVector& psi0,
                       const std::vector<double>& checkpoint_times, const OdeControl& ctrl,
                       EvolutionLog* log = nullptr);

}  // namespace xysim
