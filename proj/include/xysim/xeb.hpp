#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xysim/state.hpp"

namespace xysim {

// Multiset of measured bitstrings. Bit i of a configuration is site i (least
// significant). Counts are kept sorted by bitstring so that serialization and
// iteration order are deterministic.
struct SampleSet {
  int n_q = 0;
  int m = -1;  // sector excitation count; -1 when not sector-restricted
  bool in_sector = true;
  std::string basis_label = "Z";
  uint64_t seed = 0;
  uint64_t total = 0;
  std::vector<std::pair<uint64_t, uint64_t>> counts;  // (bitstring, multiplicity)

  void add(uint64_t bits, uint64_t count);
  void finalize();  // sort + merge duplicates, recompute total
};

// i.i.d. Z-basis draws from |psi|^2; deterministic given seed and independent
// of worker count (per-shot counter RNG, cumulative table + binary search).
SampleSet sample(const StateVector& psi, uint64_t m_shots, uint64_t seed);

// Second moment D*sum(p^2)-1 of the exact distribution.
double self_xeb_exact(const StateVector& psi);
double self_xeb_of_probs(const std::vector<double>& p);

// Unbiased empirical estimator: raw/(1-1/M) - (D-1)/(M-1).
double self_xeb_unbiased(const SampleSet& s);
// Plain plug-in estimator D*sum((M_i/M)^2)-1 (biased by (D-1)/M).
double self_xeb_naive(const SampleSet& s);

// D * mean over shots of p_sim(bitstring) - 1.
double linear_xeb(const SampleSet& s, const std::function<double(uint64_t)>& p_sim);
double linear_xeb(const SampleSet& s, const StateVector& psi_sim);

struct PhiEstimate {
  double phi = 0.0;
  bool noisy_exceeds_ideal = false;
};
// sqrt(self_xeb_noisy / self_xeb_ideal), clamped to [0, 1].
PhiEstimate phi_from_selfxeb(double noisy, double ideal);

struct PtReport {
  std::vector<double> bin_lo, bin_hi;   // log-spaced bins of D*p
  std::vector<double> density;          // Pr(p) estimate per bin
  double delta = 0.0;                   // |self-XEB - 1|
  double ks_exponential = 0.0;          // KS distance of D*p against Exp(1)
};

PtReport pt_check(const std::vector<double>& probs);
PtReport pt_check(const StateVector& psi);
PtReport pt_check_samples(const SampleSet& s);

struct PAvgTable {
  std::vector<double> p;  // elementwise mean over snapshots
  int n_snapshots = 0;
};

PAvgTable time_average_probs(const std::vector<StateVector>& snapshots);
PAvgTable time_average_probs(const std::vector<const StateVector*>& snapshots);

// p_avg-weighted second moment: sum_s p(s)^2 / p_avg(s) - 1. Reduces to the
// plain self-XEB at p_avg = 1/D.
double self_xeb_renormalized(const std::vector<double>& p, const std::vector<double>& p_avg);

struct RenormalizedFidelity {
  double f_tilde = 0.0;            // renormalized-denominator convention
  double f_tilde_plain_denom = 0.0;
  double f_tilde_bias_corrected = 0.0;  // (f - 1/N_s)/(1 - 1/N_s)
  double numerator = 0.0;
  double denom_renormalized = 0.0;
  double denom_plain = 0.0;
};

RenormalizedFidelity renormalized_fidelity(const SampleSet& s, const StateVector& psi_sim,
                                           const PAvgTable& p_avg);

struct FidelityFit {
  double f0 = 0.0;
  double eps = 0.0;
  double cycle_time = 0.0;  // ns
  double resid_rms_log = 0.0;
  bool valid = false;
};

struct FidelityPoint {
  double t;  // ns
  int n_q;
  double f;
};

// Least squares in log F over (F0, eps) for F = F0^Nq * exp(-eps*Nq*t/T).
FidelityFit fit_fidelity_ansatz(const std::vector<FidelityPoint>& points, double cycle_time_ns);

}  // namespace xysim
