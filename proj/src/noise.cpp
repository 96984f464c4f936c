#include "xysim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "xysim/parallel.hpp"
#include "xysim/rng.hpp"

namespace xysim {

ReadoutModel ReadoutModel::symmetric(int n_q, double flip_prob, double p_decay) {
  ReadoutModel m;
  m.beta.assign(n_q, Beta{1.0 - flip_prob, flip_prob, flip_prob, 1.0 - flip_prob});
  m.p_decay = p_decay;
  return m;
}

void ReadoutModel::validate(int n_q) const {
  if (static_cast<int>(beta.size()) != n_q)
    throw std::invalid_argument("ReadoutModel: beta size does not match qubit count");
  for (const auto& b : beta) {
    if (b.p00 < 0 || b.p01 < 0 || b.p10 < 0 || b.p11 < 0)
      throw std::invalid_argument("ReadoutModel: negative entry");
    if (std::abs(b.p00 + b.p10 - 1.0) > 1e-9 || std::abs(b.p01 + b.p11 - 1.0) > 1e-9)
      throw std::invalid_argument("ReadoutModel: beta columns must sum to 1");
  }
  for (const auto& g : gamma) {
    if (g.i < 0 || g.i >= n_q || g.j < 0 || g.j >= n_q || g.i == g.j)
      throw std::invalid_argument("ReadoutModel: bad gamma pair");
    for (int col = 0; col < 4; ++col) {
      double s = 0.0;
      for (int row = 0; row < 4; ++row) {
        if (g.p[row * 4 + col] < 0) throw std::invalid_argument("ReadoutModel: negative entry");
        s += g.p[row * 4 + col];
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw std::invalid_argument("ReadoutModel: gamma columns must sum to 1");
    }
  }
  if (p_decay < 0 || p_decay > 1) throw std::invalid_argument("ReadoutModel: bad decay prob");
}

ReadoutModel load_readout_csv(const std::string& path, int n_q) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_readout_csv: cannot open " + path);
  ReadoutModel m;
  m.beta.assign(n_q, ReadoutModel::Beta{});
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "qubit") {
      int q;
      double p01, p10;
      if (!(ss >> q >> p01 >> p10)) throw std::runtime_error("load_readout_csv: bad qubit row");
      m.beta.at(q) = {1.0 - p10, p01, p10, 1.0 - p01};
    } else if (kind == "pair") {
      ReadoutModel::PairGamma g;
      if (!(ss >> g.i >> g.j)) throw std::runtime_error("load_readout_csv: bad pair row");
      for (double& v : g.p)
        if (!(ss >> v)) throw std::runtime_error("load_readout_csv: pair row needs 16 entries");
      m.gamma.push_back(g);
    } else if (kind == "decay") {
      if (!(ss >> m.p_decay)) throw std::runtime_error("load_readout_csv: bad decay row");
    } else {
      throw std::runtime_error("load_readout_csv: unknown row kind '" + kind + "'");
    }
  }
  m.validate(n_q);
  return m;
}

std::vector<double> apply_depolarizing(const std::vector<double>& p, double phi) {
  if (phi < 0.0 || phi > 1.0)
    throw std::invalid_argument("apply_depolarizing: phi outside [0, 1]");
  const double mix = (1.0 - phi) / static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (size_t i = 0; i < p.size(); ++i) out[i] = phi * p[i] + mix;
  return out;
}

namespace {

// Iterate shots of a sample set in deterministic order, assigning each a
// global shot index for RNG streams.
template <class Fn>
void for_each_shot(const SampleSet& s, Fn&& fn) {
  uint64_t shot = 0;
  for (const auto& [bits, count] : s.counts)
    for (uint64_t k = 0; k < count; ++k) fn(shot++, bits);
}

struct InverseChannel {
  // corrected-bit distributions per measured value; clamped and renormalized
  std::vector<std::array<double, 2>> qubit_cols;   // [q*2 + measured] -> p(true=1)
  struct PairCols {
    int i, j;
    std::array<std::array<double, 4>, 4> col;  // [measured][true] probabilities
  };
  std::vector<PairCols> pairs;
  std::vector<bool> pair_covered;
};

InverseChannel invert_model(const ReadoutModel& m, int n_q) {
  InverseChannel inv;
  inv.qubit_cols.assign(n_q * 2, {1.0, 0.0});
  inv.pair_covered.assign(n_q, false);
  for (const auto& g : m.gamma) {
    // invert the 4x4 column-stochastic matrix by Gaussian elimination
    double a[4][8];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        a[r][c] = g.p[r * 4 + c];
        a[r][c + 4] = (r == c) ? 1.0 : 0.0;
      }
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      if (std::abs(a[piv][col]) < 1e-10)
        throw std::invalid_argument("correct_markov: gamma matrix is singular");
      std::swap_ranges(a[col], a[col] + 8, a[piv]);
      const double d = a[col][col];
      for (int c = 0; c < 8; ++c) a[col][c] /= d;
      for (int r = 0; r < 4; ++r) {
        if (r == col) continue;
        const double f = a[r][col];
        for (int c = 0; c < 8; ++c) a[r][c] -= f * a[col][c];
      }
    }
    InverseChannel::PairCols pc;
    pc.i = g.i;
    pc.j = g.j;
    for (int meas = 0; meas < 4; ++meas) {
      double norm = 0.0;
      for (int truth = 0; truth < 4; ++truth) {
        // negative inverse probabilities clamped to zero
        pc.col[meas][truth] = std::max(0.0, a[truth][4 + meas]);
        norm += pc.col[meas][truth];
      }
      if (norm <= 0.0) throw std::invalid_argument("correct_markov: degenerate gamma column");
      for (double& v : pc.col[meas]) v /= norm;
    }
    inv.pairs.push_back(pc);
    inv.pair_covered[g.i] = true;
    inv.pair_covered[g.j] = true;
  }
  for (int q = 0; q < n_q; ++q) {
    const auto& b = m.beta[q];
    const double det = b.p00 * b.p11 - b.p01 * b.p10;
    if (std::abs(det) < 1e-10)
      throw std::invalid_argument("correct_markov: beta matrix is singular at qubit " +
                                  std::to_string(q));
    // inverse columns indexed by measured value; entries may be negative
    const double i00 = b.p11 / det, i01 = -b.p01 / det;
    const double i10 = -b.p10 / det, i11 = b.p00 / det;
    // measured 0: true-bit distribution (i00, i10); measured 1: (i01, i11)
    for (int meas = 0; meas < 2; ++meas) {
      double p0 = std::max(0.0, meas == 0 ? i00 : i01);
      double p1 = std::max(0.0, meas == 0 ? i10 : i11);
      const double norm = p0 + p1;
      if (norm <= 0.0) throw std::invalid_argument("correct_markov: degenerate beta column");
      inv.qubit_cols[q * 2 + meas] = {p0 / norm, p1 / norm};
    }
  }
  return inv;
}

}  // namespace

SampleSet corrupt_samples(const SampleSet& s, const ReadoutModel& model, uint64_t seed) {
  model.validate(s.n_q);
  SampleSet out;
  out.n_q = s.n_q;
  out.m = s.m;
  out.in_sector = false;  // sector flag cleared after noise
  out.basis_label = s.basis_label;
  out.seed = seed;
  std::vector<bool> in_pair(s.n_q, false);
  for (const auto& g : model.gamma) in_pair[g.i] = in_pair[g.j] = true;

  std::map<uint64_t, uint64_t> counts;
  for_each_shot(s, [&](uint64_t shot, uint64_t bits) {
    uint64_t b = bits;
    if (model.p_decay > 0.0)
      for (int q = 0; q < s.n_q; ++q)
        if ((b >> q) & 1)
          if (u01(hash_mix(seed, shot, q, 0x0decu)) < model.p_decay) b &= ~(1ULL << q);
    for (const auto& g : model.gamma) {
      const int truth = static_cast<int>(((b >> g.i) & 1) | (((b >> g.j) & 1) << 1));
      // column truth: cumulative draw over measured outcomes
      const double u = u01(hash_mix(seed, shot, g.i, 0x6a33u));
      double acc = 0.0;
      int meas = 3;
      for (int r = 0; r < 4; ++r) {
        acc += g.p[r * 4 + truth];
        if (u < acc) {
          meas = r;
          break;
        }
      }
      b = (b & ~(1ULL << g.i) & ~(1ULL << g.j)) | (uint64_t(meas & 1) << g.i) |
          (uint64_t((meas >> 1) & 1) << g.j);
    }
    for (int q = 0; q < s.n_q; ++q) {
      if (in_pair[q]) continue;
      const auto& beta = model.beta[q];
      const int truth = static_cast<int>((b >> q) & 1);
      const double p_meas1 = truth ? beta.p11 : beta.p10;
      const bool meas = u01(hash_mix(seed, shot, q, 0xbe7au)) < p_meas1;
      b = (b & ~(1ULL << q)) | (uint64_t(meas) << q);
    }
    ++counts[b];
  });
  for (const auto& [bits, c] : counts) out.add(bits, c);
  out.finalize();
  return out;
}

SampleSet correct_markov(const SampleSet& s, const ReadoutModel& model, uint64_t seed) {
  model.validate(s.n_q);
  const InverseChannel inv = invert_model(model, s.n_q);
  SampleSet out;
  out.n_q = s.n_q;
  out.m = s.m;
  out.in_sector = false;
  out.basis_label = s.basis_label;
  out.seed = seed;
  std::map<uint64_t, uint64_t> counts;
  for_each_shot(s, [&](uint64_t shot, uint64_t bits) {
    uint64_t b = bits;
    for (const auto& pc : inv.pairs) {
      const int meas = static_cast<int>(((b >> pc.i) & 1) | (((b >> pc.j) & 1) << 1));
      const double u = u01(hash_mix(seed, shot, pc.i, 0x77c1u));
      double acc = 0.0;
      int truth = 3;
      for (int t = 0; t < 4; ++t) {
        acc += pc.col[meas][t];
        if (u < acc) {
          truth = t;
          break;
        }
      }
      b = (b & ~(1ULL << pc.i) & ~(1ULL << pc.j)) | (uint64_t(truth & 1) << pc.i) |
          (uint64_t((truth >> 1) & 1) << pc.j);
    }
    for (int q = 0; q < s.n_q; ++q) {
      if (inv.pair_covered[q]) continue;
      const int meas = static_cast<int>((b >> q) & 1);
      const double p1 = inv.qubit_cols[q * 2 + meas][1];
      const bool truth = u01(hash_mix(seed, shot, q, 0xc0feu)) < p1;
      b = (b & ~(1ULL << q)) | (uint64_t(truth) << q);
    }
    ++counts[b];
  });
  for (const auto& [bits, c] : counts) out.add(bits, c);
  out.finalize();
  return out;
}

PostselectResult postselect(const SampleSet& s, int m_excitations) {
  PostselectResult res;
  res.samples.n_q = s.n_q;
  res.samples.m = m_excitations;
  res.samples.in_sector = true;
  res.samples.basis_label = s.basis_label;
  res.samples.seed = s.seed;
  for (const auto& [bits, c] : s.counts)
    if (std::popcount(bits) == m_excitations) res.samples.add(bits, c);
  res.samples.finalize();
  res.retention = s.total ? static_cast<double>(res.samples.total) / s.total : 0.0;
  res.empty = res.samples.total == 0;
  return res;
}

SampleSet bell_convert(const StateVector& psi, const Lattice& lat,
                       const std::vector<std::array<int, 2>>& pairing, uint64_t m_shots,
                       uint64_t seed) {
  // validate: disjoint pairs, each a lattice bond
  std::vector<bool> used(lat.n_sites(), false);
  for (const auto& [i, j] : pairing) {
    if (i < 0 || j < 0 || i >= lat.n_sites() || j >= lat.n_sites() || !lat.adjacent(i, j))
      throw std::invalid_argument("bell_convert: pair is not a lattice bond");
    if (used[i] || used[j]) throw std::invalid_argument("bell_convert: overlapping pairs");
    used[i] = used[j] = true;
  }
  StateVector rotated = psi;
  const SectorBasis& basis = *psi.basis;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const auto& [i, j] : pairing) {
    const int lo = std::min(i, j), hi = std::max(i, j);
    uint64_t between = 0;
    if (hi - lo > 1) between = ((1ULL << hi) - 1) & ~((1ULL << (lo + 1)) - 1);
    cplx* amp = rotated.amp.data();
    // act on amplitude pairs keyed by the (n_i=0, n_j=1) member
    parallel_for_chunked(basis.dim(), [&](int64_t b0, int64_t e0, int) {
      uint64_t s = basis.unrank(b0);
      for (int64_t r = b0; r < e0; ++r) {
        const uint64_t ni = (s >> i) & 1, nj = (s >> j) & 1;
        if (ni == 0 && nj == 1) {
          const int64_t d = basis.hop_delta(s, lo, hi, between);
          const int64_t partner = ((s >> lo) & 1) ? r + d : r - d;
          const cplx a01 = amp[r], a10 = amp[partner];
          amp[r] = (a01 - a10) * inv_sqrt2;
          amp[partner] = (a01 + a10) * inv_sqrt2;
        }
        if (r + 1 < e0) s = SectorBasis::next_config(s);
      }
    });
  }
  SampleSet out = sample(rotated, m_shots, seed);
  out.basis_label = "bell";
  return out;
}

BellDecode bell_decode(const SampleSet& s, const std::vector<std::array<int, 2>>& pairing) {
  BellDecode dec;
  dec.bond_energy.assign(pairing.size(), 0.0);
  dec.mean_photons_per_pair.assign(pairing.size(), 0.0);
  if (s.total == 0) return dec;
  double photons = 0.0;
  for (const auto& [bits, c] : s.counts) {
    const double w = static_cast<double>(c);
    for (size_t k = 0; k < pairing.size(); ++k) {
      const int bi = (bits >> pairing[k][0]) & 1;
      const int bj = (bits >> pairing[k][1]) & 1;
      // (0,0): 0 photons; (0,1): XX=YY=-1, 1 photon; (1,0): +1, 1; (1,1): 2
      if (bi == 0 && bj == 1)
        dec.bond_energy[k] -= w;
      else if (bi == 1 && bj == 0)
        dec.bond_energy[k] += w;
      dec.mean_photons_per_pair[k] += w * (bi + bj);
    }
    photons += w * std::popcount(bits);
  }
  for (size_t k = 0; k < pairing.size(); ++k) {
    dec.bond_energy[k] /= static_cast<double>(s.total);
    dec.mean_photons_per_pair[k] /= static_cast<double>(s.total);
  }
  dec.mean_total_photons = photons / static_cast<double>(s.total);
  return dec;
}

std::vector<std::vector<std::array<int, 2>>> bond_coverings(const Lattice& lat) {
  std::vector<std::vector<std::array<int, 2>>> families(4);
  for (const auto& b : lat.bonds) {
    const auto& si = lat.sites[b[0]];
    const auto& sj = lat.sites[b[1]];
    if (si[1] == sj[1])
      families[si[0] % 2].push_back({b[0], b[1]});  // horizontal: even/odd column
    else
      families[2 + si[1] % 2].push_back({b[0], b[1]});  // vertical: even/odd row
  }
  std::vector<std::vector<std::array<int, 2>>> out;
  for (auto& f : families)
    if (!f.empty()) out.push_back(std::move(f));
  return out;
}

}  // namespace xysim
