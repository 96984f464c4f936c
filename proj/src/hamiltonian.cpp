#include "xysim/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "xysim/parallel.hpp"

namespace xysim {

SpinHamiltonian::SpinHamiltonian(std::shared_ptr<const Lattice> lat)
    : lattice(std::move(lat)),
      onsite(lattice->n_sites(), 0.0),
      hop(lattice->n_bonds(), 0.0),
      nn_density(lattice->n_bonds(), 0.0),
      triples(lattice->triples.size()) {}

void SpinHamiltonian::validate() const {
  if (!lattice) throw std::invalid_argument("SpinHamiltonian: missing lattice");
  if (static_cast<int>(onsite.size()) != lattice->n_sites() ||
      static_cast<int>(hop.size()) != lattice->n_bonds() ||
      static_cast<int>(nn_density.size()) != lattice->n_bonds() ||
      triples.size() != lattice->triples.size())
    throw std::invalid_argument("SpinHamiltonian: coefficient table sizes do not match lattice");
  auto finite = [](double v) { return std::isfinite(v); };
  for (double v : onsite)
    if (!finite(v)) throw std::invalid_argument("SpinHamiltonian: non-finite onsite term");
  for (double v : hop)
    if (!finite(v)) throw std::invalid_argument("SpinHamiltonian: non-finite hop term");
  for (double v : nn_density)
    if (!finite(v)) throw std::invalid_argument("SpinHamiltonian: non-finite nn term");
  for (const auto& t : triples)
    if (!finite(t.xnx) || !finite(t.xix) || !finite(t.nxx))
      throw std::invalid_argument("SpinHamiltonian: non-finite three-site term");
}

bool SpinHamiltonian::has_offdiag_occupancy_terms() const {
  for (const auto& t : triples)
    if (t.xnx != 0.0 || t.xix != 0.0 || t.nxx != 0.0) return true;
  return false;
}

SpinHamiltonian SpinHamiltonian::linear_combination(double a, const SpinHamiltonian& A, double b,
                                                    const SpinHamiltonian& B) {
  if (A.lattice != B.lattice || A.onsite.size() != B.onsite.size())
    throw std::invalid_argument("linear_combination: operands on different lattices");
  SpinHamiltonian out(A.lattice);
  for (size_t i = 0; i < out.onsite.size(); ++i) out.onsite[i] = a * A.onsite[i] + b * B.onsite[i];
  for (size_t i = 0; i < out.hop.size(); ++i) {
    out.hop[i] = a * A.hop[i] + b * B.hop[i];
    out.nn_density[i] = a * A.nn_density[i] + b * B.nn_density[i];
  }
  for (size_t i = 0; i < out.triples.size(); ++i) {
    out.triples[i].xnx = a * A.triples[i].xnx + b * B.triples[i].xnx;
    out.triples[i].xix = a * A.triples[i].xix + b * B.triples[i].xix;
    out.triples[i].nxx = a * A.triples[i].nxx + b * B.triples[i].nxx;
  }
  return out;
}

std::string SpinHamiltonian::dump_terms() const {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < onsite.size(); ++i) os << "onsite\t" << i << "\t" << onsite[i] << "\n";
  for (size_t b = 0; b < hop.size(); ++b)
    os << "hop\t" << lattice->bonds[b][0] << " " << lattice->bonds[b][1] << "\t" << hop[b] << "\n";
  for (size_t b = 0; b < nn_density.size(); ++b)
    os << "nn\t" << lattice->bonds[b][0] << " " << lattice->bonds[b][1] << "\t" << nn_density[b]
       << "\n";
  for (size_t t = 0; t < triples.size(); ++t) {
    const auto& p = lattice->triples[t];
    const std::string ids =
        std::to_string(p[0]) + " " + std::to_string(p[1]) + " " + std::to_string(p[2]);
    os << "xnx\t" << ids << "\t" << triples[t].xnx << "\n";
    os << "xix\t" << ids << "\t" << triples[t].xix << "\n";
    os << "nxx\t" << ids << "\t" << triples[t].nxx << "\n";
  }
  return os.str();
}

SpinHamiltonian XYEnergyObservable::as_hamiltonian() const {
  SpinHamiltonian h(lattice);
  std::fill(h.hop.begin(), h.hop.end(), 1.0);
  return h;
}

std::array<double, 2> RampSchedule::knobs_at(double t) const {
  if (waypoints.empty()) throw std::invalid_argument("RampSchedule: no waypoints");
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end()));
  if (t < t_start() - eps || t > t_end() + eps)
    throw std::out_of_range("RampSchedule: t=" + std::to_string(t) + " outside [" +
                            std::to_string(t_start()) + ", " + std::to_string(t_end()) + "]");
  t = std::clamp(t, t_start(), t_end());
  size_t k = 1;
  while (k + 1 < waypoints.size() && t > waypoints[k].t) ++k;
  const auto& w0 = waypoints[k - 1];
  const auto& w1 = waypoints[k];
  const double span = w1.t - w0.t;
  const double f = span > 0 ? (t - w0.t) / span : 0.0;
  return {w0.h + f * (w1.h - w0.h), w0.g + f * (w1.g - w0.g)};
}

SpinHamiltonian schedule_eval(const RampSchedule& s, double t) {
  const auto [h, g] = s.knobs_at(t);
  const double scale = g / s.g_reference;
  SpinHamiltonian out = s.base;
  for (size_t i = 0; i < out.onsite.size(); ++i)
    out.onsite[i] += h * s.base.lattice->sublattice_parity[i];
  for (auto& v : out.hop) v *= scale;
  for (auto& v : out.nn_density) v *= scale;
  for (auto& tc : out.triples) {
    tc.xnx *= scale;
    tc.xix *= scale;
    tc.nxx *= scale;
  }
  return out;
}

namespace {
uint64_t between_mask(int a, int b) {
  // bits strictly between min and max
  const int lo = std::min(a, b), hi = std::max(a, b);
  if (hi - lo <= 1) return 0;
  return ((1ULL << hi) - 1) & ~((1ULL << (lo + 1)) - 1);
}
}  // namespace

SectorMatvec::SectorMatvec(const SpinHamiltonian& h, std::shared_ptr<const SectorBasis> basis)
    : basis_(std::move(basis)) {
  compile(h, nullptr);
}

SectorMatvec::SectorMatvec(const SpinHamiltonian& base, const std::vector<double>& pattern,
                           std::shared_ptr<const SectorBasis> basis)
    : basis_(std::move(basis)) {
  compile(base, &pattern);
}

void SectorMatvec::compile(const SpinHamiltonian& h, const std::vector<double>* pattern) {
  h.validate();
  const Lattice& lat = *h.lattice;
  if (lat.n_sites() != basis_->n_qubits())
    throw std::invalid_argument("SectorMatvec: lattice site count does not match basis");

  for (size_t b = 0; b < h.hop.size(); ++b)
    if (h.hop[b] != 0.0) {
      const int a = lat.bonds[b][0], c = lat.bonds[b][1];
      hops_.push_back({uint8_t(a), uint8_t(c), uint8_t(a), 0, between_mask(a, c), h.hop[b], 0.0});
    }
  for (size_t t = 0; t < h.triples.size(); ++t) {
    const auto& p = lat.triples[t];
    const auto& tc = h.triples[t];
    if (tc.xnx != 0.0 || tc.xix != 0.0)
      hops_.push_back({uint8_t(p[0]), uint8_t(p[2]), uint8_t(p[1]), 0,
                       between_mask(p[0], p[2]), tc.xix, tc.xnx});
    if (tc.nxx != 0.0) {
      const int ja = std::min(p[1], p[2]), jb = std::max(p[1], p[2]);
      hops_.push_back(
          {uint8_t(ja), uint8_t(jb), uint8_t(p[0]), 0, between_mask(ja, jb), 0.0, tc.nxx});
      const int ia = std::min(p[0], p[1]), ib = std::max(p[0], p[1]);
      hops_.push_back(
          {uint8_t(ia), uint8_t(ib), uint8_t(p[2]), 0, between_mask(ia, ib), 0.0, tc.nxx});
    }
  }

  const int64_t n = basis_->dim();
  const bool any_nn = std::any_of(h.nn_density.begin(), h.nn_density.end(),
                                  [](double v) { return v != 0.0; });
  d_static_.assign(n, 0.0);
  if (any_nn) d_coupling_.assign(n, 0.0);
  if (pattern) d_pattern_.assign(n, 0.0);
  has_coupling_diag_ = any_nn;
  has_pattern_ = pattern != nullptr;

  const int nb = lat.n_bonds();
  parallel_for_chunked(n, [&](int64_t lo, int64_t hi, int) {
    uint64_t s = basis_->unrank(lo);
    for (int64_t r = lo; r < hi; ++r) {
      double dstat = 0.0, dpat = 0.0;
      uint64_t bits = s;
      while (bits) {
        const int i = std::countr_zero(bits);
        bits &= bits - 1;
        dstat += h.onsite[i];
        if (pattern) dpat += (*pattern)[i];
      }
      d_static_[r] = dstat;
      if (pattern) d_pattern_[r] = dpat;
      if (any_nn) {
        double dnn = 0.0;
        for (int b = 0; b < nb; ++b)
          if (((s >> lat.bonds[b][0]) & 1) && ((s >> lat.bonds[b][1]) & 1))
            dnn += h.nn_density[b];
        d_coupling_[r] = dnn;
      }
      if (r + 1 < hi) s = SectorBasis::next_config(s);
    }
  });
}

void SectorMatvec::apply_fused(const cplx* x, cplx* y, cplx alpha, const cplx* add, cplx* acc,
                               cplx acc_coef, double cs, double hp) const {
  const int64_t n = basis_->dim();
  const Hop* hops = hops_.data();
  const int nh = static_cast<int>(hops_.size());
  const double* ds = d_static_.data();
  const double* dc = has_coupling_diag_ ? d_coupling_.data() : nullptr;
  const double* dp = has_pattern_ ? d_pattern_.data() : nullptr;
  const double shift = diag_shift_;
  const SectorBasis& basis = *basis_;

  parallel_for_chunked(n, [&](int64_t lo, int64_t hi, int) {
    uint64_t s = basis.unrank(lo);
    for (int64_t r = lo; r < hi; ++r) {
      double diag = ds[r] + shift;
      if (dc) diag += cs * dc[r];
      if (dp) diag += hp * dp[r];
      double vre = diag * x[r].real();
      double vim = diag * x[r].imag();
      double hre = 0.0, him = 0.0;
      for (int t = 0; t < nh; ++t) {
        const Hop& hh = hops[t];
        const uint64_t na = (s >> hh.a) & 1;
        if (na == ((s >> hh.b) & 1)) continue;
        const double g = hh.g0 + hh.g1 * static_cast<double>((s >> hh.csite) & 1);
        const int64_t d = basis.hop_delta(s, hh.a, hh.b, hh.between);
        const cplx xv = x[na ? r + d : r - d];
        hre += g * xv.real();
        him += g * xv.imag();
      }
      vre += cs * hre;
      vim += cs * him;
      cplx v = alpha * cplx(vre, vim);
      if (add) v += add[r];
      y[r] = v;
      if (acc) acc[r] += acc_coef * v;
      if (r + 1 < hi) s = SectorBasis::next_config(s);
    }
  });
  ++matvecs_;
}

void SectorMatvec::apply(const StateVector& in, StateVector& out, double cs, double hp) const {
  if (!in.basis || !in.basis->same_sector(*basis_))
    throw std::invalid_argument("SectorMatvec::apply: basis mismatch");
  if (out.dim() != in.dim()) out = StateVector(in.basis);
  apply_fused(in.amp.data(), out.amp.data(), cplx(1.0, 0.0), nullptr, nullptr, cplx(0.0, 0.0), cs,
              hp);
}

std::array<double, 2> SectorMatvec::expectation(const StateVector& x, double cs,
                                                double hp) const {
  if (!x.basis || !x.basis->same_sector(*basis_))
    throw std::invalid_argument("SectorMatvec::expectation: basis mismatch");
  const int64_t n = basis_->dim();
  std::vector<double> pre(chunk_count(n), 0.0), pim(chunk_count(n), 0.0);
  const Hop* hops = hops_.data();
  const int nh = static_cast<int>(hops_.size());
  const double* ds = d_static_.data();
  const double* dc = has_coupling_diag_ ? d_coupling_.data() : nullptr;
  const double* dp = has_pattern_ ? d_pattern_.data() : nullptr;
  const double shift = diag_shift_;
  const SectorBasis& basis = *basis_;
  const cplx* xa = x.amp.data();

  parallel_for_chunked(n, [&](int64_t lo, int64_t hi, int chunk) {
    uint64_t s = basis.unrank(lo);
    double sre = 0.0, sim = 0.0;
    for (int64_t r = lo; r < hi; ++r) {
      double diag = ds[r] + shift;
      if (dc) diag += cs * dc[r];
      if (dp) diag += hp * dp[r];
      double hre = 0.0, him = 0.0;
      for (int t = 0; t < nh; ++t) {
        const Hop& hh = hops[t];
        const uint64_t na = (s >> hh.a) & 1;
        if (na == ((s >> hh.b) & 1)) continue;
        const double g = hh.g0 + hh.g1 * static_cast<double>((s >> hh.csite) & 1);
        const int64_t d = basis.hop_delta(s, hh.a, hh.b, hh.between);
        const cplx xv = xa[na ? r + d : r - d];
        hre += g * xv.real();
        him += g * xv.imag();
      }
      const double yre = diag * xa[r].real() + cs * hre;
      const double yim = diag * xa[r].imag() + cs * him;
      sre += xa[r].real() * yre + xa[r].imag() * yim;
      sim += xa[r].real() * yim - xa[r].imag() * yre;
      if (r + 1 < hi) s = SectorBasis::next_config(s);
    }
    pre[chunk] = sre;
    pim[chunk] = sim;
  });
  double re = 0.0, im = 0.0;
  for (size_t c = 0; c < pre.size(); ++c) {
    re += pre[c];
    im += pim[c];
  }
  ++matvecs_;
  return {re, im};
}

StateVector apply(const SpinHamiltonian& h, const StateVector& psi) {
  SectorMatvec mv(h, psi.basis);
  StateVector out(psi.basis);
  mv.apply(psi, out);
  return out;
}

double expectation(const SpinHamiltonian& h, const StateVector& psi) {
  SectorMatvec mv(h, psi.basis);
  return mv.expectation(psi)[0];
}

double expectation(const XYEnergyObservable& h_xy, const StateVector& psi) {
  return expectation(h_xy.as_hamiltonian(), psi);
}

std::array<double, 2> bandwidth_bound(const SpinHamiltonian& h, int m_excitations) {
  h.validate();
  std::vector<double> w = h.onsite;
  std::sort(w.begin(), w.end());
  const int m = std::min<int>(m_excitations, static_cast<int>(w.size()));
  double dmin = 0.0, dmax = 0.0;
  for (int i = 0; i < m; ++i) {
    dmin += w[i];
    dmax += w[w.size() - 1 - i];
  }
  for (double g : h.nn_density) {
    dmin += std::min(0.0, g);
    dmax += std::max(0.0, g);
  }
  double radius = 0.0;
  for (double g : h.hop) radius += std::abs(g);
  for (const auto& t : h.triples)
    radius += std::max(std::abs(t.xix), std::abs(t.xix + t.xnx)) + 2.0 * std::abs(t.nxx);
  return {dmin - radius, dmax + radius};
}

}  // namespace xysim
