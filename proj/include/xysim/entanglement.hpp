#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xysim/lattice.hpp"
#include "xysim/state.hpp"
#include "xysim/xeb.hpp"

namespace xysim {

// Schmidt spectrum of an in-sector state across a site cut. The reduced
// density matrix is block-diagonal in the left excitation number M_L, so each
// block is decomposed independently.
struct SchmidtSpectrum {
  std::vector<int> cut;  // left site ids, sorted
  int left_sites = 0, right_sites = 0, excitations = 0;
  struct Block {
    int m_left;
    std::vector<double> values;  // descending
  };
  std::vector<Block> blocks;

  double sum_squares() const;
  std::vector<double> all_values() const;  // pooled, descending
};

SchmidtSpectrum schmidt(const StateVector& psi, const std::vector<int>& cut);

// Half split along the shortest lattice direction.
std::vector<int> default_half_cut(const Lattice& lat);

struct EntropyBundle {
  double von_neumann = 0.0;  // nats
  double renyi_half = 0.0;   // bits; log-negativity of the pure state
  double renyi_2 = 0.0;      // bits
  double e_p = 0.0;          // renyi_half + log2(fidelity)
  double n_eff = 0.0;        // 2 S/ln2 + 1/ln2
};

EntropyBundle entropies(const SchmidtSpectrum& s, double fidelity = 1.0);

// Tr(rho_A^2) of the subsystem without materializing the spectrum.
double subsystem_purity(const StateVector& psi, const std::vector<int>& sites);

// Dense reduced density matrix on 2^{|sites|} local basis states (local bit
// j corresponds to the j-th smallest site id).
Eigen::MatrixXcd reduced_density_matrix(const StateVector& psi, const std::vector<int>& sites);

// U(1)-constrained quarter-circle law of Schmidt values for typical states.
struct QuarterCircleDensity {
  struct Block {
    int m_left;
    double d_l, d_r;
    double lam_minus, lam_plus;
    double count;          // Schmidt values in the block
    double second_moment;  // integral S^2 p(S)
    double fourth_moment;  // integral S^4 p(S)
  };
  std::vector<Block> blocks;
  double dim;        // C(N, M)
  double chi_max;    // total Schmidt-value count
  double density(double s) const;
  double cdf(double s) const;  // fraction of values <= s
};

QuarterCircleDensity theory_quarter_circle(int left, int right, int m_total);

// Single-block limit: generic (no conservation) quarter-circle density.
QuarterCircleDensity generic_quarter_circle(double dim_left, double dim_right);

// Closed-form maxima for the half-filled equal bipartition.
struct TheoryMaxEntropies {
  double s_vn_u1_exact = 0.0;    // nats, block sum
  double s_vn_u1_asym = 0.0;     // (N/2)ln2 - (ln2)/2 - 1/4
  double s_vn_generic = 0.0;     // (N/2)ln2 - 1/2
  double offset_s_generic = 0.0;        // -> 0.097
  double e_n_u1_exact_bits = 0.0;
  double e_n_u1_asym_bits = 0.0;
  double e_n_generic_bits = 0.0;
  double offset_e_n_u1 = 0.0;           // -> 0.303
  double offset_e_n_generic = 0.0;      // -> 0.248
  double renyi2_u1_exact_bits = 0.0;
  double renyi2_u1_asym_bits = 0.0;     // N/2 + log2(sqrt(3)/4)
  double chi_slope_exact = 0.0;         // finite-N fidelity-vs-chi slope
  double chi_slope_asym = 0.0;          // 4 sqrt(2)
  double ideal_line_intercept = -0.449; // plotted E_N vs n_eff reference
};

TheoryMaxEntropies theory_max_entropies(int n_qubits);

struct FidelityChiBound {
  double bound = 0.0;       // clamped at 1
  double slope_exact = 0.0;
  double slope_asym = 0.0;  // 4 sqrt(2)
};

FidelityChiBound fidelity_chi_bound(double chi, double chi_max, int n_qubits);

struct SaturationTime {
  double t_sat = 0.0;
  double ratio = 0.0;  // t_sat / L_long
  bool valid = false;
};

// First time the trace crosses 90% of s_max (linear interpolation).
SaturationTime saturation_time(const std::vector<double>& times,
                               const std::vector<double>& entropy, double s_max, int l_long);

// Randomized-measurement Renyi-2 estimation from per-unitary sample sets
// restricted to the subsystem. The kernel is 2^N (-2)^{-Hamming}; the
// jackknife-style per-setting debias removes the finite-K collision term.
struct Renyi2Estimate {
  double purity_raw = 0.0;
  double purity_unbiased = 0.0;
  double renyi_2 = 0.0;  // -log2(purity_unbiased)
  int settings = 0;
  uint64_t shots_per_setting = 0;
};

Renyi2Estimate renyi2_randomized(const std::vector<SampleSet>& sets, int n_sub);

// Emulates the measurement protocol: uniform single-qubit Cliffords per
// setting, Z sampling of the rotated subsystem state.
std::vector<SampleSet> randomized_measurement_sets(const StateVector& psi,
                                                   const std::vector<int>& sites, int n_settings,
                                                   uint64_t shots, uint64_t seed);

// The 24 single-qubit Clifford unitaries (deterministic order).
const std::vector<Eigen::Matrix2cd>& single_qubit_cliffords();

}  // namespace xysim
