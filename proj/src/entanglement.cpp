#include "xysim/entanglement.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "xysim/rng.hpp"

namespace xysim {

namespace {

// Scattered bit patterns of weight m over the given (sorted) site list, in
// sector order, together with the local patterns.
struct PatternTable {
  std::vector<uint64_t> global;  // bits placed on the listed sites
  std::vector<uint64_t> local;   // bits on positions 0..sites-1
};

PatternTable enumerate_patterns(const std::vector<int>& sites, int m) {
  PatternTable t;
  const int n = static_cast<int>(sites.size());
  const uint64_t count = BinomialTable::get()(n, m);
  t.global.reserve(count);
  t.local.reserve(count);
  if (count == 0) return t;
  uint64_t s = (m == 0) ? 0 : ((1ULL << m) - 1);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t g = 0;
    uint64_t bits = s;
    while (bits) {
      const int j = std::countr_zero(bits);
      bits &= bits - 1;
      g |= 1ULL << sites[j];
    }
    t.global.push_back(g);
    t.local.push_back(s);
    if (i + 1 < count) s = SectorBasis::next_config(s);
  }
  return t;
}

std::vector<int> complement_sites(const std::vector<int>& cut, int n) {
  std::vector<bool> in(n, false);
  for (int s : cut) {
    if (s < 0 || s >= n) throw std::invalid_argument("cut site out of range");
    if (in[s]) throw std::invalid_argument("cut contains a duplicate site");
    in[s] = true;
  }
  std::vector<int> rest;
  for (int s = 0; s < n; ++s)
    if (!in[s]) rest.push_back(s);
  return rest;
}

// Amplitude matrix of one M_L block (left patterns x right patterns).
Eigen::MatrixXcd block_matrix(const StateVector& psi, const PatternTable& left,
                              const PatternTable& right) {
  const SectorBasis& basis = *psi.basis;
  Eigen::MatrixXcd m(left.global.size(), right.global.size());
  for (size_t i = 0; i < left.global.size(); ++i)
    for (size_t j = 0; j < right.global.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          psi.amp[basis.rank(left.global[i] | right.global[j])];
  return m;
}

}  // namespace

std::vector<int> default_half_cut(const Lattice& lat) {
  // Half split along the shortest direction: sites ordered with the shorter
  // dimension running fastest, first floor(N/2) of them form the left part.
  const int n = lat.n_sites();
  const int half = n / 2;
  std::vector<int> cut;
  for (int id = 0; id < n; ++id) {
    const int x = lat.sites[id][0], y = lat.sites[id][1];
    const int order = lat.lx <= lat.ly ? x + y * lat.lx : y + x * lat.ly;
    if (order < half) cut.push_back(id);
  }
  std::sort(cut.begin(), cut.end());
  return cut;
}

SchmidtSpectrum schmidt(const StateVector& psi, const std::vector<int>& cut_in) {
  if (!psi.basis) throw std::invalid_argument("schmidt: state has no basis");
  const int n = psi.basis->n_qubits();
  std::vector<int> cut = cut_in;
  std::sort(cut.begin(), cut.end());
  if (cut.empty() || static_cast<int>(cut.size()) >= n)
    throw std::invalid_argument("schmidt: cut must be a nonempty proper subset of sites");
  const std::vector<int> rest = complement_sites(cut, n);

  SchmidtSpectrum spec;
  spec.cut = cut;
  spec.left_sites = static_cast<int>(cut.size());
  spec.right_sites = static_cast<int>(rest.size());
  spec.excitations = psi.basis->excitations();

  const int m = spec.excitations;
  const auto& binom = BinomialTable::get();
  for (int ml = std::max(0, m - spec.right_sites); ml <= std::min(spec.left_sites, m); ++ml) {
    if (binom(spec.left_sites, ml) == 0 || binom(spec.right_sites, m - ml) == 0) continue;
    const auto left = enumerate_patterns(cut, ml);
    const auto right = enumerate_patterns(rest, m - ml);
    const Eigen::MatrixXcd mat = block_matrix(psi, left, right);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat);
    SchmidtSpectrum::Block block;
    block.m_left = ml;
    block.values.assign(svd.singularValues().data(),
                        svd.singularValues().data() + svd.singularValues().size());
    std::sort(block.values.begin(), block.values.end(), std::greater<double>());
    spec.blocks.push_back(std::move(block));
  }
  return spec;
}

double SchmidtSpectrum::sum_squares() const {
  double s = 0.0;
  for (const auto& b : blocks)
    for (double v : b.values) s += v * v;
  return s;
}

std::vector<double> SchmidtSpectrum::all_values() const {
  std::vector<double> v;
  for (const auto& b : blocks) v.insert(v.end(), b.values.begin(), b.values.end());
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

EntropyBundle entropies(const SchmidtSpectrum& s, double fidelity) {
  if (fidelity <= 0.0 || fidelity > 1.0)
    throw std::invalid_argument("entropies: fidelity must be in (0, 1]");
  const double ln2 = std::log(2.0);
  EntropyBundle b;
  double sum_s = 0.0, sum_s4 = 0.0;
  for (const auto& blk : s.blocks)
    for (double v : blk.values) {
      const double p = v * v;
      if (p > 0.0) b.von_neumann -= p * std::log(p);
      sum_s += v;
      sum_s4 += p * p;
    }
  b.renyi_half = 2.0 * std::log2(sum_s);
  b.renyi_2 = -std::log2(sum_s4);
  b.e_p = b.renyi_half + std::log2(fidelity);
  b.n_eff = 2.0 * b.von_neumann / ln2 + 1.0 / ln2;
  return b;
}

double subsystem_purity(const StateVector& psi, const std::vector<int>& sites) {
  std::vector<int> cut = sites;
  std::sort(cut.begin(), cut.end());
  const int n = psi.basis->n_qubits();
  const std::vector<int> rest = complement_sites(cut, n);
  const int m = psi.basis->excitations();
  double purity = 0.0;
  for (int ml = std::max(0, m - static_cast<int>(rest.size()));
       ml <= std::min(static_cast<int>(cut.size()), m); ++ml) {
    const auto left = enumerate_patterns(cut, ml);
    const auto right = enumerate_patterns(rest, m - ml);
    if (left.global.empty() || right.global.empty()) continue;
    const Eigen::MatrixXcd mat = block_matrix(psi, left, right);
    if (mat.rows() <= mat.cols()) {
      const Eigen::MatrixXcd g = mat * mat.adjoint();
      purity += g.squaredNorm();
    } else {
      const Eigen::MatrixXcd g = mat.adjoint() * mat;
      purity += g.squaredNorm();
    }
  }
  return purity;
}

Eigen::MatrixXcd reduced_density_matrix(const StateVector& psi, const std::vector<int>& sites) {
  std::vector<int> cut = sites;
  std::sort(cut.begin(), cut.end());
  const int n = psi.basis->n_qubits();
  const int na = static_cast<int>(cut.size());
  if (na > 20) throw std::invalid_argument("reduced_density_matrix: subsystem too large");
  const std::vector<int> rest = complement_sites(cut, n);
  const int m = psi.basis->excitations();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(1LL << na, 1LL << na);
  for (int ml = std::max(0, m - static_cast<int>(rest.size())); ml <= std::min(na, m); ++ml) {
    const auto left = enumerate_patterns(cut, ml);
    const auto right = enumerate_patterns(rest, m - ml);
    if (left.global.empty() || right.global.empty()) continue;
    const Eigen::MatrixXcd mat = block_matrix(psi, left, right);
    const Eigen::MatrixXcd blk = mat * mat.adjoint();
    for (size_t i = 0; i < left.local.size(); ++i)
      for (size_t j = 0; j < left.local.size(); ++j)
        rho(static_cast<Eigen::Index>(left.local[i]), static_cast<Eigen::Index>(left.local[j])) +=
            blk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return rho;
}

namespace {
// moments of one quarter-circle block (closed form, see the density below)
QuarterCircleDensity::Block make_block(int ml, double d_l, double d_r, double dim) {
  QuarterCircleDensity::Block b;
  b.m_left = ml;
  b.d_l = d_l;
  b.d_r = d_r;
  const double small = std::min(d_l, d_r), big = std::max(d_l, d_r);
  const double lam = small / big;
  const double c = std::sqrt(big / dim);
  b.lam_minus = (1.0 - std::sqrt(lam)) * c;
  b.lam_plus = (1.0 + std::sqrt(lam)) * c;
  b.count = small;
  b.second_moment = d_l * d_r / dim;
  const double ap = b.lam_plus * b.lam_plus, am = b.lam_minus * b.lam_minus;
  b.fourth_moment = dim / 32.0 * (ap + am) * (ap - am) * (ap - am);
  return b;
}
}  // namespace

QuarterCircleDensity theory_quarter_circle(int left, int right, int m_total) {
  if (left < 1 || right < 1 || m_total < 0 || m_total > left + right)
    throw std::invalid_argument("theory_quarter_circle: invalid bipartition");
  const auto& binom = BinomialTable::get();
  QuarterCircleDensity q;
  q.dim = static_cast<double>(binom(left + right, m_total));
  q.chi_max = 0.0;
  for (int ml = std::max(0, m_total - right); ml <= std::min(left, m_total); ++ml) {
    const double dl = static_cast<double>(binom(left, ml));
    const double dr = static_cast<double>(binom(right, m_total - ml));
    if (dl == 0.0 || dr == 0.0) continue;
    q.blocks.push_back(make_block(ml, dl, dr, q.dim));
    q.chi_max += q.blocks.back().count;
  }
  return q;
}

QuarterCircleDensity generic_quarter_circle(double dim_left, double dim_right) {
  QuarterCircleDensity q;
  q.dim = dim_left * dim_right;
  q.blocks.push_back(make_block(0, dim_left, dim_right, q.dim));
  q.chi_max = q.blocks.front().count;
  return q;
}

double QuarterCircleDensity::density(double s) const {
  double p = 0.0;
  for (const auto& b : blocks) {
    if (s <= b.lam_minus || s >= b.lam_plus || s <= 0.0) continue;
    const double s2 = s * s;
    p += dim / (M_PI * s) *
         std::sqrt((b.lam_plus * b.lam_plus - s2) * (s2 - b.lam_minus * b.lam_minus));
  }
  return p;
}

double QuarterCircleDensity::cdf(double s) const {
  // per-block Simpson integration up to s, normalized by the total count
  double acc = 0.0;
  for (const auto& b : blocks) {
    if (s <= b.lam_minus) continue;
    const double hi = std::min(s, b.lam_plus);
    const int steps = 512;
    const double h = (hi - b.lam_minus) / steps;
    if (h <= 0.0) continue;
    double integral = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double x0 = b.lam_minus + k * h;
      const double xm = x0 + 0.5 * h;
      const double x1 = x0 + h;
      auto f = [&](double x) {
        if (x <= b.lam_minus || x >= b.lam_plus || x <= 0.0) return 0.0;
        const double x2 = x * x;
        return dim / (M_PI * x) *
               std::sqrt((b.lam_plus * b.lam_plus - x2) * (x2 - b.lam_minus * b.lam_minus));
      };
      integral += h / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
    }
    acc += std::min(integral, b.count);
  }
  return acc / chi_max;
}

TheoryMaxEntropies theory_max_entropies(int n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("theory_max_entropies: n must be even and >= 4");
  const double ln2 = std::log(2.0);
  const int l = n / 2;
  const int m = n / 2;
  const auto& binom = BinomialTable::get();
  TheoryMaxEntropies t;

  // block sums at half filling; every block is square (D_L = D_R)
  double lgd = std::lgamma(n + 1.0) - 2.0 * std::lgamma(l + 1.0);  // log C(n, n/2)
  double s_exact = 0.0, sum_s = 0.0, purity = 0.0;
  for (int ml = 0; ml <= l; ++ml) {
    double lgdr;
    if (n <= 64)
      lgdr = std::log(static_cast<double>(binom(l, m - ml)));
    else
      lgdr = std::lgamma(l + 1.0) - std::lgamma(m - ml + 1.0) - std::lgamma(l - m + ml + 1.0);
    const double w = std::exp(2.0 * lgdr - lgd);  // D_L D_R / D
    s_exact += w * ((lgd - lgdr) - 0.5);
    sum_s += 8.0 / (3.0 * M_PI) * std::exp(1.5 * lgdr - 0.5 * lgd);
    purity += 2.0 * std::exp(3.0 * lgdr - 2.0 * lgd);
  }
  t.s_vn_u1_exact = s_exact;
  t.s_vn_u1_asym = (0.5 * n - 0.5) * ln2 - 0.25;
  t.s_vn_generic = 0.5 * n * ln2 - 0.5;
  t.offset_s_generic = t.s_vn_generic - t.s_vn_u1_asym;
  t.e_n_u1_exact_bits = 2.0 * std::log2(sum_s);
  t.e_n_u1_asym_bits = 0.5 * n + std::log2(std::pow(2.0, 1.5) / 3.0 * 64.0 / (9.0 * M_PI * M_PI));
  t.e_n_generic_bits = 0.5 * n + std::log2(64.0 / (9.0 * M_PI * M_PI));
  t.offset_e_n_u1 = t.e_n_u1_asym_bits - t.s_vn_u1_asym / ln2;
  t.offset_e_n_generic = t.e_n_generic_bits - t.s_vn_generic / ln2;
  t.renyi2_u1_exact_bits = -std::log2(purity);
  t.renyi2_u1_asym_bits = 0.5 * n + std::log2(std::sqrt(3.0) / 4.0);

  const auto chi = fidelity_chi_bound(0.0, 1.0, n);
  t.chi_slope_exact = chi.slope_exact;
  t.chi_slope_asym = chi.slope_asym;
  return t;
}

FidelityChiBound fidelity_chi_bound(double chi, double chi_max, int n) {
  if (chi < 0.0 || chi_max <= 0.0 || chi > chi_max)
    throw std::invalid_argument("fidelity_chi_bound: need 0 <= chi <= chi_max");
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("fidelity_chi_bound: n must be even and >= 4");
  FidelityChiBound out;
  const int l = n / 2;
  auto lbinom = [](int a, int b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  const double log_zeta = std::log(4.0) + l * std::log(2.0) +
                          0.5 * (lbinom(l, l / 2) + lbinom(n - l, (n - l) / 2)) - lbinom(n, n / 2);
  out.slope_exact = std::exp(log_zeta);
  out.slope_asym = 4.0 * std::sqrt(2.0);
  out.bound = std::min(1.0, out.slope_exact * chi / chi_max);
  return out;
}

SaturationTime saturation_time(const std::vector<double>& times,
                               const std::vector<double>& entropy, double s_max, int l_long) {
  if (times.size() != entropy.size() || times.size() < 2)
    throw std::invalid_argument("saturation_time: trace too short");
  SaturationTime out;
  const double target = 0.9 * s_max;
  for (size_t i = 0; i < times.size(); ++i) {
    if (entropy[i] >= target) {
      if (i == 0) {
        out.t_sat = times[0];
      } else {
        const double f = (target - entropy[i - 1]) / (entropy[i] - entropy[i - 1]);
        out.t_sat = times[i - 1] + f * (times[i] - times[i - 1]);
      }
      out.ratio = out.t_sat / l_long;
      out.valid = true;
      return out;
    }
  }
  return out;  // never crosses
}

const std::vector<Eigen::Matrix2cd>& single_qubit_cliffords() {
  static const std::vector<Eigen::Matrix2cd> group = [] {
    const cplx i(0.0, 1.0);
    Eigen::Matrix2cd h, s;
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    s << 1, 0, 0, i;
    auto canon = [](Eigen::Matrix2cd m) {
      // strip global phase: make the largest entry real positive
      int bi = 0, bj = 0;
      double best = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if (std::abs(m(a, b)) > best + 1e-12) {
            best = std::abs(m(a, b));
            bi = a;
            bj = b;
          }
      m *= std::abs(m(bi, bj)) / m(bi, bj);
      return m;
    };
    auto key = [&](const Eigen::Matrix2cd& m) {
      std::array<int64_t, 8> k{};
      int idx = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          k[idx++] = llround(m(a, b).real() * 1e6);
          k[idx++] = llround(m(a, b).imag() * 1e6);
        }
      return k;
    };
    std::map<std::array<int64_t, 8>, Eigen::Matrix2cd> seen;
    std::vector<Eigen::Matrix2cd> frontier{canon(Eigen::Matrix2cd::Identity())};
    seen[key(frontier[0])] = frontier[0];
    while (!frontier.empty()) {
      std::vector<Eigen::Matrix2cd> next;
      for (const auto& u : frontier)
        for (const auto& gen : {h, s}) {
          const Eigen::Matrix2cd v = canon(gen * u);
          if (seen.emplace(key(v), v).second) next.push_back(v);
        }
      frontier = std::move(next);
    }
    std::vector<Eigen::Matrix2cd> out;
    for (auto& [k, v] : seen) out.push_back(v);
    return out;
  }();
  return group;
}

std::vector<SampleSet> randomized_measurement_sets(const StateVector& psi,
                                                   const std::vector<int>& sites, int n_settings,
                                                   uint64_t shots, uint64_t seed) {
  const auto& cliffords = single_qubit_cliffords();
  const int na = static_cast<int>(sites.size());
  const Eigen::MatrixXcd rho = reduced_density_matrix(psi, sites);
  const int64_t dim = 1LL << na;
  std::vector<SampleSet> sets;
  sets.reserve(n_settings);
  for (int m = 0; m < n_settings; ++m) {
    // rotate: rho -> U rho U^dagger with U a tensor product of Cliffords
    Eigen::MatrixXcd rot = rho;
    for (int q = 0; q < na; ++q) {
      const auto& u = cliffords[hash_mix(seed, m, q) % cliffords.size()];
      // apply u on qubit q from the left and u^dagger from the right
      Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dim, dim);
      for (int64_t r = 0; r < dim; ++r)
        for (int64_t c = 0; c < dim; ++c) {
          const cplx v = rot(r, c);
          if (v == cplx(0.0, 0.0)) continue;
          const int rb = (r >> q) & 1, cb = (c >> q) & 1;
          for (int rb2 = 0; rb2 < 2; ++rb2)
            for (int cb2 = 0; cb2 < 2; ++cb2) {
              const int64_t r2 = (r & ~(1LL << q)) | (int64_t(rb2) << q);
              const int64_t c2 = (c & ~(1LL << q)) | (int64_t(cb2) << q);
              next(r2, c2) += u(rb2, rb) * v * std::conj(u(cb2, cb));
            }
        }
      rot = std::move(next);
    }
    std::vector<double> probs(dim);
    for (int64_t k = 0; k < dim; ++k) probs[k] = std::max(0.0, rot(k, k).real());
    std::vector<double> cdf(dim + 1, 0.0);
    for (int64_t k = 0; k < dim; ++k) cdf[k + 1] = cdf[k] + probs[k];

    SampleSet set;
    set.n_q = na;
    set.m = -1;
    set.in_sector = false;
    set.basis_label = "clifford:" + std::to_string(m);
    set.seed = seed;
    std::map<uint64_t, uint64_t> counts;
    for (uint64_t shot = 0; shot < shots; ++shot) {
      const double u = u01(hash_mix(seed, 0x5e771u + m, shot)) * cdf[dim];
      const int64_t k =
          std::min<int64_t>(dim - 1, std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin() - 1);
      ++counts[static_cast<uint64_t>(k)];
    }
    for (const auto& [bits, c] : counts) set.add(bits, c);
    set.finalize();
    sets.push_back(std::move(set));
  }
  return sets;
}

Renyi2Estimate renyi2_randomized(const std::vector<SampleSet>& sets, int n_sub) {
  if (sets.size() < 2)
    throw std::invalid_argument("renyi2_randomized: need at least 2 unitary settings");
  Renyi2Estimate est;
  est.settings = static_cast<int>(sets.size());
  const int64_t dim = 1LL << n_sub;
  const double pow2n = static_cast<double>(dim);
  double raw_acc = 0.0, unb_acc = 0.0;
  for (const auto& s : sets) {
    if (s.n_q != n_sub)
      throw std::invalid_argument("renyi2_randomized: sample set subsystem size mismatch");
    if (s.total < 2) throw std::invalid_argument("renyi2_randomized: needs K >= 2 shots");
    est.shots_per_setting = s.total;
    std::vector<double> p(dim, 0.0);
    for (const auto& [bits, c] : s.counts)
      p[bits] = static_cast<double>(c) / static_cast<double>(s.total);
    // kernel sum_{s,s'} P(s)P(s')(-2)^{-D[s,s']} via the factorized transform
    std::vector<double> v = p;
    for (int q = 0; q < n_sub; ++q) {
      const int64_t bit = 1LL << q;
      for (int64_t k = 0; k < dim; ++k) {
        if (k & bit) continue;
        const double a = v[k], b = v[k | bit];
        v[k] = a - 0.5 * b;
        v[k | bit] = b - 0.5 * a;
      }
    }
    double x = 0.0;
    for (int64_t k = 0; k < dim; ++k) x += p[k] * v[k];
    const double raw = pow2n * x;
    const double kshots = static_cast<double>(s.total);
    raw_acc += raw;
    unb_acc += kshots / (kshots - 1.0) * raw - pow2n / (kshots - 1.0);
  }
  est.purity_raw = raw_acc / est.settings;
  est.purity_unbiased = unb_acc / est.settings;
  est.renyi_2 = -std::log2(est.purity_unbiased);
  return est;
}

}  // namespace xysim
