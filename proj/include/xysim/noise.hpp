#pragma once

#include <array>
#include <string>
#include <vector>

#include "xysim/lattice.hpp"
#include "xysim/state.hpp"
#include "xysim/xeb.hpp"

namespace xysim {

// Classical readout channel: per-qubit column-stochastic beta matrices with
// entries p(measured|true), optional correlated per-pair 4x4 gamma matrices,
// and a photon-decay probability applied as a 1->0 flip before readout.
struct ReadoutModel {
  struct Beta {
    double p00 = 1.0, p01 = 0.0;  // p(0|0), p(0|1)
    double p10 = 0.0, p11 = 1.0;  // p(1|0), p(1|1)
  };
  std::vector<Beta> beta;  // per qubit
  struct PairGamma {
    int i = 0, j = 0;
    std::array<double, 16> p{};  // p[meas*4 + true], columns sum to 1
  };
  std::vector<PairGamma> gamma;
  double p_decay = 0.0;

  static ReadoutModel symmetric(int n_q, double flip_prob, double p_decay);
  void validate(int n_q) const;
};

// CSV loader: per-qubit rows "qubit,p01,p10"; optional pair rows
// "pair,i,j,<16 column-major entries>"; "decay,<p>" sets the decay
// probability.
ReadoutModel load_readout_csv(const std::string& path, int n_q);

struct DepolarizingModel {
  double phi = 1.0;
};

// p~ = phi*p + (1-phi)/D over the sector table.
std::vector<double> apply_depolarizing(const std::vector<double>& p, double phi);

// Per-shot decay then readout flips; output is flagged post-noise.
SampleSet corrupt_samples(const SampleSet& s, const ReadoutModel& model, uint64_t seed);

// Markov-like stochastic correction sampling from the clamped-and-
// renormalized inverse channel, per bitstring. Only beta/gamma are inverted;
// decay is handled by postselection downstream.
SampleSet correct_markov(const SampleSet& s, const ReadoutModel& model, uint64_t seed);

struct PostselectResult {
  SampleSet samples;
  double retention = 0.0;
  bool empty = false;
};

PostselectResult postselect(const SampleSet& s, int m_excitations);

// Applies the pairwise entangling conversion gate (mixes |01>,|10> within the
// sector) to every pair and samples in Z. Pairs must be disjoint bonds.
SampleSet bell_convert(const StateVector& psi, const Lattice& lat,
                       const std::vector<std::array<int, 2>>& pairing, uint64_t m_shots,
                       uint64_t seed);

// Pair-outcome decoding: (0,0)->XX=YY=0, photons 0; (0,1)->-1, 1;
// (1,0)->+1, 1; (1,1)->0, 2.
struct BellDecode {
  std::vector<double> bond_energy;  // <(XX+YY)/2> per pair, pairing order
  std::vector<double> mean_photons_per_pair;
  double mean_total_photons = 0.0;
};

BellDecode bell_decode(const SampleSet& s, const std::vector<std::array<int, 2>>& pairing);

// Four-coloring of the grid bonds (left/right/up/down families); each family
// is a disjoint pairing usable for one Bell-conversion pass.
std::vector<std::vector<std::array<int, 2>>> bond_coverings(const Lattice& lat);

}  // namespace xysim
