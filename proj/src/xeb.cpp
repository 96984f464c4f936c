#include "xysim/xeb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "xysim/parallel.hpp"
#include "xysim/rng.hpp"

namespace xysim {

void SampleSet::add(uint64_t bits, uint64_t count) {
  counts.emplace_back(bits, count);
  total += count;
}

void SampleSet::finalize() {
  std::sort(counts.begin(), counts.end());
  std::vector<std::pair<uint64_t, uint64_t>> merged;
  uint64_t tot = 0;
  for (const auto& [bits, c] : counts) {
    if (!merged.empty() && merged.back().first == bits)
      merged.back().second += c;
    else
      merged.emplace_back(bits, c);
    tot += c;
  }
  counts = std::move(merged);
  total = tot;
}

SampleSet sample(const StateVector& psi, uint64_t m_shots, uint64_t seed) {
  const SectorBasis& basis = *psi.basis;
  SampleSet out;
  out.n_q = basis.n_qubits();
  out.m = basis.excitations();
  out.in_sector = true;
  out.seed = seed;
  if (m_shots == 0) return out;

  const int64_t d = basis.dim();
  std::vector<double> cdf(d + 1, 0.0);
  for (int64_t i = 0; i < d; ++i) cdf[i + 1] = cdf[i] + std::norm(psi.amp[i]);
  const double norm = cdf[d];
  if (norm <= 0.0) throw std::invalid_argument("sample: zero-norm state");

  const int chunks = chunk_count(static_cast<int64_t>(m_shots));
  std::vector<std::map<uint64_t, uint64_t>> local(chunks);
  parallel_for_chunked(static_cast<int64_t>(m_shots), [&](int64_t lo, int64_t hi, int chunk) {
    auto& mine = local[chunk];
    for (int64_t s = lo; s < hi; ++s) {
      const double u = u01(hash_mix(seed, static_cast<uint64_t>(s), 0x5a3fu)) * norm;
      const int64_t r =
          std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin() - 1;
      ++mine[basis.unrank(std::min<int64_t>(r, d - 1))];
    }
  });
  std::map<uint64_t, uint64_t> total;
  for (const auto& mine : local)
    for (const auto& [bits, c] : mine) total[bits] += c;
  for (const auto& [bits, c] : total) out.add(bits, c);
  out.finalize();
  return out;
}

double self_xeb_of_probs(const std::vector<double>& p) {
  const double* pp = p.data();
  const double s2 = parallel_reduce_sum(static_cast<int64_t>(p.size()),
                                        [pp](int64_t lo, int64_t hi) {
                                          double s = 0.0;
                                          for (int64_t i = lo; i < hi; ++i) s += pp[i] * pp[i];
                                          return s;
                                        });
  return static_cast<double>(p.size()) * s2 - 1.0;
}

double self_xeb_exact(const StateVector& psi) {
  const cplx* a = psi.amp.data();
  const int64_t d = psi.dim();
  const double s2 = parallel_reduce_sum(d, [a](int64_t lo, int64_t hi) {
    double s = 0.0;
    for (int64_t i = lo; i < hi; ++i) {
      const double p = std::norm(a[i]);
      s += p * p;
    }
    return s;
  });
  return static_cast<double>(d) * s2 - 1.0;
}

namespace {
double sector_dim(const SampleSet& s) {
  if (s.m < 0) throw std::invalid_argument("sample set is not sector-restricted");
  return static_cast<double>(BinomialTable::get()(s.n_q, s.m));
}
}  // namespace

double self_xeb_naive(const SampleSet& s) {
  if (s.total < 1) throw std::invalid_argument("self_xeb: empty sample set");
  const double m = static_cast<double>(s.total);
  const double d = sector_dim(s);
  double sum = 0.0;
  for (const auto& [bits, c] : s.counts) {
    const double f = static_cast<double>(c) / m;
    sum += f * f;
  }
  return d * sum - 1.0;
}

double self_xeb_unbiased(const SampleSet& s) {
  if (s.total < 2) throw std::invalid_argument("self_xeb_unbiased: needs at least 2 shots");
  const double m = static_cast<double>(s.total);
  const double d = sector_dim(s);
  return self_xeb_naive(s) / (1.0 - 1.0 / m) - (d - 1.0) / (m - 1.0);
}

double linear_xeb(const SampleSet& s, const std::function<double(uint64_t)>& p_sim) {
  if (s.total == 0) throw std::invalid_argument("linear_xeb: empty sample set");
  const double d = sector_dim(s);
  double acc = 0.0;
  for (const auto& [bits, c] : s.counts) acc += static_cast<double>(c) * p_sim(bits);
  return d * acc / static_cast<double>(s.total) - 1.0;
}

double linear_xeb(const SampleSet& s, const StateVector& psi_sim) {
  const SectorBasis& basis = *psi_sim.basis;
  return linear_xeb(s, [&](uint64_t bits) { return std::norm(psi_sim.amp[basis.rank(bits)]); });
}

PhiEstimate phi_from_selfxeb(double noisy, double ideal) {
  if (ideal <= 0.0) throw std::invalid_argument("phi_from_selfxeb: ideal self-XEB must be > 0");
  PhiEstimate est;
  est.noisy_exceeds_ideal = noisy > ideal;
  const double ratio = std::clamp(noisy / ideal, 0.0, 1.0);
  est.phi = std::sqrt(ratio);
  return est;
}

namespace {
PtReport pt_from_values(std::vector<double> x) {
  // x holds D*p per bitstring
  PtReport rep;
  const size_t n = x.size();
  if (n == 0) throw std::invalid_argument("pt_check: empty input");
  double mean_sq = 0.0;
  for (double v : x) mean_sq += v * v;
  rep.delta = std::abs(mean_sq / n - 1.0);

  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-x[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
  }
  rep.ks_exponential = ks;

  const double lo = 1e-6, hi = std::max(10.0, x.back() * 1.05);
  const int bins = 40;
  const double step = std::log(hi / lo) / bins;
  rep.bin_lo.resize(bins);
  rep.bin_hi.resize(bins);
  rep.density.assign(bins, 0.0);
  for (int b = 0; b < bins; ++b) {
    rep.bin_lo[b] = lo * std::exp(b * step);
    rep.bin_hi[b] = lo * std::exp((b + 1) * step);
  }
  for (double v : x) {
    if (v < lo || v >= hi) continue;
    const int b = std::min(bins - 1, static_cast<int>(std::log(v / lo) / step));
    rep.density[b] += 1.0;
  }
  for (int b = 0; b < bins; ++b)
    rep.density[b] /= n * (rep.bin_hi[b] - rep.bin_lo[b]);
  return rep;
}
}  // namespace

PtReport pt_check(const std::vector<double>& probs) {
  std::vector<double> x(probs.size());
  const double d = static_cast<double>(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) x[i] = d * probs[i];
  return pt_from_values(std::move(x));
}

PtReport pt_check(const StateVector& psi) {
  std::vector<double> x(psi.dim());
  const double d = static_cast<double>(psi.dim());
  for (size_t i = 0; i < x.size(); ++i) x[i] = d * std::norm(psi.amp[i]);
  return pt_from_values(std::move(x));
}

PtReport pt_check_samples(const SampleSet& s) {
  const double d = sector_dim(s);
  const uint64_t dim = static_cast<uint64_t>(d);
  std::vector<double> x;
  x.reserve(dim);
  for (const auto& [bits, c] : s.counts)
    x.push_back(d * static_cast<double>(c) / static_cast<double>(s.total));
  // bitstrings never observed carry p = 0
  x.resize(dim, 0.0);
  return pt_from_values(std::move(x));
}

PAvgTable time_average_probs(const std::vector<const StateVector*>& snapshots) {
  if (snapshots.empty()) throw std::invalid_argument("time_average_probs: no snapshots");
  const SectorBasis& basis = *snapshots.front()->basis;
  PAvgTable table;
  table.n_snapshots = static_cast<int>(snapshots.size());
  table.p.assign(basis.dim(), 0.0);
  for (const StateVector* s : snapshots) {
    if (!s->basis->same_sector(basis))
      throw std::invalid_argument("time_average_probs: snapshot basis mismatch");
    for (size_t i = 0; i < table.p.size(); ++i) table.p[i] += std::norm(s->amp[i]);
  }
  for (auto& v : table.p) v /= table.n_snapshots;
  return table;
}

PAvgTable time_average_probs(const std::vector<StateVector>& snapshots) {
  std::vector<const StateVector*> ptrs;
  ptrs.reserve(snapshots.size());
  for (const auto& s : snapshots) ptrs.push_back(&s);
  return time_average_probs(ptrs);
}

double self_xeb_renormalized(const std::vector<double>& p, const std::vector<double>& p_avg) {
  if (p.size() != p_avg.size())
    throw std::invalid_argument("self_xeb_renormalized: table size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p_avg[i] <= 0.0) {
      if (p[i] > 0.0)
        throw std::invalid_argument("self_xeb_renormalized: zero p_avg at a weighted entry");
      continue;
    }
    acc += p[i] * p[i] / p_avg[i];
  }
  return acc - 1.0;
}

RenormalizedFidelity renormalized_fidelity(const SampleSet& s, const StateVector& psi_sim,
                                           const PAvgTable& p_avg) {
  if (p_avg.p.size() != psi_sim.dim())
    throw std::invalid_argument("renormalized_fidelity: p_avg size mismatch");
  const SectorBasis& basis = *psi_sim.basis;
  RenormalizedFidelity out;
  double acc = 0.0;
  for (const auto& [bits, c] : s.counts) {
    const uint64_t r = basis.rank(bits);
    if (p_avg.p[r] <= 0.0) {
      std::string str(basis.n_qubits(), '0');
      for (int q = 0; q < basis.n_qubits(); ++q)
        if ((bits >> q) & 1) str[basis.n_qubits() - 1 - q] = '1';
      throw std::invalid_argument("renormalized_fidelity: observed bitstring " + str +
                                  " has zero p_avg");
    }
    acc += static_cast<double>(c) * std::norm(psi_sim.amp[r]) / p_avg.p[r];
  }
  out.numerator = acc / static_cast<double>(s.total) - 1.0;

  std::vector<double> p_sim(psi_sim.dim());
  for (size_t i = 0; i < p_sim.size(); ++i) p_sim[i] = std::norm(psi_sim.amp[i]);
  out.denom_renormalized = self_xeb_renormalized(p_sim, p_avg.p);
  out.denom_plain = self_xeb_of_probs(p_sim);
  out.f_tilde = out.numerator / out.denom_renormalized;
  out.f_tilde_plain_denom = out.numerator / out.denom_plain;
  const double ns = static_cast<double>(p_avg.n_snapshots);
  out.f_tilde_bias_corrected = ns > 1 ? (out.f_tilde - 1.0 / ns) / (1.0 - 1.0 / ns) : out.f_tilde;
  return out;
}

FidelityFit fit_fidelity_ansatz(const std::vector<FidelityPoint>& points, double cycle_time_ns) {
  FidelityFit fit;
  fit.cycle_time = cycle_time_ns;
  std::vector<double> x1, x2, y;
  for (const auto& p : points) {
    if (p.f <= 0.0) continue;  // nonpositive fidelities dropped
    x1.push_back(static_cast<double>(p.n_q));
    x2.push_back(p.n_q * p.t / cycle_time_ns);
    y.push_back(std::log(p.f));
  }
  if (x1.size() < 3) return fit;
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < x1.size(); ++i) {
    a11 += x1[i] * x1[i];
    a12 += x1[i] * x2[i];
    a22 += x2[i] * x2[i];
    b1 += x1[i] * y[i];
    b2 += x2[i] * y[i];
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) < 1e-12 * std::max(1.0, a11 * a22)) return fit;  // degenerate (single time)
  const double c1 = (a22 * b1 - a12 * b2) / det;
  const double c2 = (a11 * b2 - a12 * b1) / det;
  fit.f0 = std::exp(c1);
  fit.eps = -c2;
  double ss = 0.0;
  for (size_t i = 0; i < x1.size(); ++i) {
    const double e = y[i] - (c1 * x1[i] + c2 * x2[i]);
    ss += e * e;
  }
  fit.resid_rms_log = std::sqrt(ss / x1.size());
  fit.valid = true;
  return fit;
}

}  // namespace xysim
