#pragma once

#include <map>
#include <vector>

#include "xysim/hamiltonian.hpp"
#include "xysim/lattice.hpp"
#include "xysim/state.hpp"

namespace xysim {

// Off-diagonal pair coherence D_ab = sum over configurations with the
// excitation on a and b empty of conj(psi[swapped]) * psi[s]. Everything the
// measurement suite needs reduces to it inside the sector:
//   <(X_a X_b + Y_a Y_b)/2>       = 2 Re D_ab
//   <(X_a Y_b - Y_a X_b)/2>       = -2 Im D_ab
cplx pair_coherence(const StateVector& psi, int a, int b);

// <Z_a Z_b> (diagonal).
double zz_expectation(const StateVector& psi, int a, int b);

// <X_a X_b X_c X_d> on four distinct sites (equals <YYYY> in-sector).
double xxxx_expectation(const StateVector& psi, int a, int b, int c, int d);

struct CorrelationReport {
  // displacement-averaged G(r) = <(XX+YY)/2>, keyed by (dx, dy)
  std::map<std::pair<int, int>, double> g_map;
  // radial profiles over exact Euclidean distances (r > 0)
  std::vector<double> radial_r;
  std::vector<double> radial_signed;     // raw average
  std::vector<double> radial_corrected;  // sublattice-parity corrected
  bool parity_correction = true;         // which profile feeds the fits
  double fit_range_max = 6.0;
  double xi = 0.0, gamma = 0.0;
  double eps_exp = 0.0, eps_pow = 0.0;
  bool exp_fit_valid = false, pow_fit_valid = false;
};

struct DecayFits {
  double xi = 0.0, gamma = 0.0, eps_exp = 0.0, eps_pow = 0.0;
  bool exp_valid = false, pow_valid = false;
};

CorrelationReport two_point(const StateVector& psi, const Lattice& lat,
                            bool parity_correction = true, double fit_range_max = 6.0);

// Least-squares log-space fits of the radial profile: exponential (slope
// -1/xi) and power law (slope -gamma). Non-positive bins are dropped; fewer
// than 3 surviving points marks the fit invalid instead of throwing.
DecayFits fit_correlation_decay(const std::vector<double>& r, const std::vector<double>& g,
                                double max_r = 6.0);

struct VortexReport {
  double n_v = 0.0;                       // Swendsen proxy
  std::vector<double> vorticity_map;      // V_i per plaquette
  std::vector<double> spin_current_map;   // per bond
  double rms_vorticity = 0.0;
};

double vortex_density(const StateVector& psi, const Lattice& lat);
VortexReport vorticity_and_current(const StateVector& psi, const Lattice& lat);

struct EnergyReport {
  double eps = 0.0;        // <H_XY>/n_B
  double sigma_eps = 0.0;  // sqrt(<H_XY^2>-<H_XY>^2)/n_B
  std::vector<double> per_bond;
  std::vector<double> column_profile;  // mean site energy per x-column
};

EnergyReport energy(const StateVector& psi, const XYEnergyObservable& h_xy);

// Energy difference between column means left/right of cut_x.
double column_imbalance(const std::vector<double>& column_profile, int cut_x);

struct TransportFit {
  double diffusion = 0.0;   // units of g
  double decay_rate = 0.0;  // units of g
  double r_squared = 0.0;
  double decay_resid = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  bool diffusion_valid = false;
  bool decay_valid = false;
};

// Single-parameter least-squares fit of the 1D discrete diffusion model
// d eps_x/dt = D (eps_{x-1} - 2 eps_x + eps_{x+1}) with reflecting
// boundaries, integrated exactly in the cosine eigenbasis from the first
// profile. g converts the rate to units of the coupling.
TransportFit fit_diffusion(const std::vector<double>& times_ns,
                           const std::vector<std::vector<double>>& column_profiles, double g);

// Exponential decay rate of a trace over [t_lo, t_hi].
TransportFit fit_decay_rate(const std::vector<double>& times_ns,
                            const std::vector<double>& values, double t_lo, double t_hi,
                            double g);

}  // namespace xysim
