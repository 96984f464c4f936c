#include "xysim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xysim/parallel.hpp"

namespace xysim {

namespace {
uint64_t between_mask(int a, int b) {
  const int lo = std::min(a, b), hi = std::max(a, b);
  if (hi - lo <= 1) return 0;
  return ((1ULL << hi) - 1) & ~((1ULL << (lo + 1)) - 1);
}
}  // namespace

cplx pair_coherence(const StateVector& psi, int a, int b) {
  if (a == b) throw std::invalid_argument("pair_coherence: identical sites");
  const SectorBasis& basis = *psi.basis;
  const int lo = std::min(a, b), hi = std::max(a, b);
  const uint64_t between = between_mask(a, b);
  const cplx* amp = psi.amp.data();
  const int64_t n = basis.dim();
  std::vector<double> pre(chunk_count(n), 0.0), pim(chunk_count(n), 0.0);
  parallel_for_chunked(n, [&](int64_t b0, int64_t e0, int chunk) {
    uint64_t s = basis.unrank(b0);
    double sre = 0.0, sim = 0.0;
    for (int64_t r = b0; r < e0; ++r) {
      const uint64_t na = (s >> a) & 1, nb = (s >> b) & 1;
      if (na == 1 && nb == 0) {
        const int64_t d = basis.hop_delta(s, lo, hi, between);
        const int64_t partner = ((s >> lo) & 1) ? r + d : r - d;
        const cplx v = std::conj(amp[partner]) * amp[r];
        sre += v.real();
        sim += v.imag();
      }
      if (r + 1 < e0) s = SectorBasis::next_config(s);
    }
    pre[chunk] = sre;
    pim[chunk] = sim;
  });
  double re = 0.0, im = 0.0;
  for (size_t c = 0; c < pre.size(); ++c) {
    re += pre[c];
    im += pim[c];
  }
  return {re, im};
}

double zz_expectation(const StateVector& psi, int a, int b) {
  const SectorBasis& basis = *psi.basis;
  const cplx* amp = psi.amp.data();
  return parallel_reduce_sum(basis.dim(), [&](int64_t b0, int64_t e0) {
    uint64_t s = basis.unrank(b0);
    double acc = 0.0;
    for (int64_t r = b0; r < e0; ++r) {
      const double za = ((s >> a) & 1) ? -1.0 : 1.0;
      const double zb = ((s >> b) & 1) ? -1.0 : 1.0;
      acc += za * zb * std::norm(amp[r]);
      if (r + 1 < e0) s = SectorBasis::next_config(s);
    }
    return acc;
  });
}

double xxxx_expectation(const StateVector& psi, int a, int b, int c, int d) {
  const SectorBasis& basis = *psi.basis;
  const uint64_t mask = (1ULL << a) | (1ULL << b) | (1ULL << c) | (1ULL << d);
  const cplx* amp = psi.amp.data();
  return parallel_reduce_sum(basis.dim(), [&](int64_t b0, int64_t e0) {
    uint64_t s = basis.unrank(b0);
    double acc = 0.0;
    for (int64_t r = b0; r < e0; ++r) {
      if (std::popcount(s & mask) == 2) {
        const uint64_t partner_bits = s ^ mask;
        const uint64_t pr = basis.rank(partner_bits);
        acc += (std::conj(amp[pr]) * amp[r]).real();
      }
      if (r + 1 < e0) s = SectorBasis::next_config(s);
    }
    return acc;
  });
}

DecayFits fit_correlation_decay(const std::vector<double>& r, const std::vector<double>& g,
                                double max_r) {
  DecayFits out;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i] > 0.0 && r[i] <= max_r && g[i] > 0.0) {
      xs.push_back(r[i]);
      ys.push_back(std::log(g[i]));
    }
  if (xs.size() < 3) return out;
  auto linfit = [](const std::vector<double>& x, const std::vector<double>& y, double& slope,
                   double& icpt, double& rms) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    slope = (n * sxy - sx * sy) / det;
    icpt = (sy - slope * sx) / n;
    double ss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (icpt + slope * x[i]);
      ss += e * e;
    }
    rms = std::sqrt(ss / n);
  };
  double slope, icpt;
  linfit(xs, ys, slope, icpt, out.eps_exp);
  if (slope < -1e-12) {
    out.xi = -1.0 / slope;
    out.exp_valid = true;
  }
  std::vector<double> lx(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) lx[i] = std::log(xs[i]);
  linfit(lx, ys, slope, icpt, out.eps_pow);
  out.gamma = -slope;
  out.pow_valid = true;
  return out;
}

CorrelationReport two_point(const StateVector& psi, const Lattice& lat, bool parity_correction,
                            double fit_range_max) {
  CorrelationReport rep;
  rep.parity_correction = parity_correction;
  rep.fit_range_max = fit_range_max;
  const int n = lat.n_sites();

  std::map<std::pair<int, int>, std::pair<double, int>> disp_acc;
  std::map<int64_t, std::array<double, 3>> radial_acc;  // key: distance^2 scaled; (sum, corr, n)
  disp_acc[{0, 0}] = {static_cast<double>(n), n};  // G(0) = <(X^2+Y^2)/2> = 1 per site

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double gij = 2.0 * pair_coherence(psi, i, j).real();
      const int dx = lat.sites[j][0] - lat.sites[i][0];
      const int dy = lat.sites[j][1] - lat.sites[i][1];
      for (auto [ddx, ddy] : {std::pair{dx, dy}, std::pair{-dx, -dy}}) {
        auto& a = disp_acc[{ddx, ddy}];
        a.first += gij;
        a.second += 1;
      }
      const double parity = lat.sublattice_parity[i] * lat.sublattice_parity[j];
      auto& rb = radial_acc[static_cast<int64_t>(dx) * dx + static_cast<int64_t>(dy) * dy];
      rb[0] += gij;
      rb[1] += parity * gij;
      rb[2] += 1.0;
    }
  for (auto& [key, acc] : disp_acc) rep.g_map[key] = acc.first / acc.second;
  for (auto& [d2, acc] : radial_acc) {
    rep.radial_r.push_back(std::sqrt(static_cast<double>(d2)));
    rep.radial_signed.push_back(acc[0] / acc[2]);
    rep.radial_corrected.push_back(acc[1] / acc[2]);
  }
  const auto fits = fit_correlation_decay(
      rep.radial_r, parity_correction ? rep.radial_corrected : rep.radial_signed, fit_range_max);
  rep.xi = fits.xi;
  rep.gamma = fits.gamma;
  rep.eps_exp = fits.eps_exp;
  rep.eps_pow = fits.eps_pow;
  rep.exp_fit_valid = fits.exp_valid;
  rep.pow_fit_valid = fits.pow_valid;
  return rep;
}

double vortex_density(const StateVector& psi, const Lattice& lat) {
  if (lat.plaquettes.empty())
    throw std::invalid_argument("vortex_density: lattice has no plaquettes");
  double total = 0.0;
  for (const auto& p : lat.plaquettes) {
    // (1 - X1X3 - Y2Y4)(1 - Y1Y3 - X2X4) expanded into sector expectations:
    // 1 - (XX+YY)_13 - (XX+YY)_24 - Z1Z3 - Z2Z4 + XXXX + YYYY,
    // with <XXXX> = <YYYY> inside a fixed-number sector.
    const double hop13 = 2.0 * pair_coherence(psi, p[0], p[2]).real();
    const double hop24 = 2.0 * pair_coherence(psi, p[1], p[3]).real();
    const double zz13 = zz_expectation(psi, p[0], p[2]);
    const double zz24 = zz_expectation(psi, p[1], p[3]);
    const double xxxx = xxxx_expectation(psi, p[0], p[1], p[2], p[3]);
    total += 1.0 - 2.0 * hop13 - 2.0 * hop24 - zz13 - zz24 + 2.0 * xxxx;
  }
  return total / (4.0 * lat.n_plaquettes());
}

VortexReport vorticity_and_current(const StateVector& psi, const Lattice& lat) {
  VortexReport rep;
  for (const auto& p : lat.plaquettes) {
    // V = (X1Y2 - Y2X3 + X3Y4 - Y4X1)/4 reduces to the cyclic sum of pair
    // coherences around the plaquette.
    const double im12 = pair_coherence(psi, p[0], p[1]).imag();
    const double im23 = pair_coherence(psi, p[1], p[2]).imag();
    const double im34 = pair_coherence(psi, p[2], p[3]).imag();
    const double im41 = pair_coherence(psi, p[3], p[0]).imag();
    rep.vorticity_map.push_back(-0.5 * (im12 + im23 + im34 + im41));
  }
  for (const auto& b : lat.bonds)
    rep.spin_current_map.push_back(-2.0 * pair_coherence(psi, b[0], b[1]).imag());
  double ss = 0.0;
  for (double v : rep.vorticity_map) ss += v * v;
  rep.rms_vorticity =
      rep.vorticity_map.empty() ? 0.0 : std::sqrt(ss / rep.vorticity_map.size());
  if (!lat.plaquettes.empty()) rep.n_v = vortex_density(psi, lat);
  return rep;
}

EnergyReport energy(const StateVector& psi, const XYEnergyObservable& h_xy) {
  const Lattice& lat = *h_xy.lattice;
  EnergyReport rep;
  double sum = 0.0;
  for (const auto& b : lat.bonds) {
    const double e = 2.0 * pair_coherence(psi, b[0], b[1]).real();
    rep.per_bond.push_back(e);
    sum += e;
  }
  rep.eps = sum / lat.n_bonds();

  // sigma_eps from ||H_XY psi||^2; exact, no correlator reconstruction.
  SpinHamiltonian hxy = h_xy.as_hamiltonian();
  StateVector hpsi = apply(hxy, psi);
  double h2 = 0.0;
  for (const auto& a : hpsi.amp) h2 += std::norm(a);
  const double mean = sum;
  const double var = std::max(0.0, h2 - mean * mean);
  rep.sigma_eps = std::sqrt(var) / lat.n_bonds();

  // half of each bond energy to each endpoint, averaged per column
  std::vector<double> site_e(lat.n_sites(), 0.0);
  for (size_t b = 0; b < lat.bonds.size(); ++b) {
    site_e[lat.bonds[b][0]] += 0.5 * rep.per_bond[b];
    site_e[lat.bonds[b][1]] += 0.5 * rep.per_bond[b];
  }
  rep.column_profile.assign(lat.lx, 0.0);
  for (int i = 0; i < lat.n_sites(); ++i) rep.column_profile[lat.sites[i][0]] += site_e[i];
  for (auto& v : rep.column_profile) v /= lat.ly;
  return rep;
}

double column_imbalance(const std::vector<double>& profile, int cut_x) {
  double left = 0.0, right = 0.0;
  int nl = 0, nr = 0;
  for (int x = 0; x < static_cast<int>(profile.size()); ++x) {
    if (x < cut_x) {
      left += profile[x];
      ++nl;
    } else {
      right += profile[x];
      ++nr;
    }
  }
  if (nl == 0 || nr == 0) throw std::invalid_argument("column_imbalance: cut outside lattice");
  return left / nl - right / nr;
}

namespace {

// Neumann-Laplacian mode propagation of a column profile.
std::vector<double> diffuse_profile(const std::vector<double>& init, double dt_times_d) {
  const int L = static_cast<int>(init.size());
  std::vector<double> out(L, 0.0);
  for (int k = 0; k < L; ++k) {
    double coef = 0.0;
    for (int x = 0; x < L; ++x)
      coef += init[x] * std::cos(M_PI * k * (x + 0.5) / L);
    coef *= (k == 0 ? 1.0 : 2.0) / L;
    const double lam = -4.0 * std::pow(std::sin(M_PI * k / (2.0 * L)), 2);
    for (int x = 0; x < L; ++x)
      out[x] += coef * std::exp(lam * dt_times_d) * std::cos(M_PI * k * (x + 0.5) / L);
  }
  return out;
}

}  // namespace

TransportFit fit_diffusion(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& profiles, double g) {
  if (times.size() < 4 || profiles.size() != times.size())
    throw std::invalid_argument("fit_diffusion: need >= 4 time points with profiles");
  TransportFit fit;
  const auto& init = profiles.front();
  const double lo = *std::min_element(init.begin(), init.end());
  const double hi = *std::max_element(init.begin(), init.end());
  double scale = 0.0;
  for (const auto& p : profiles)
    for (double v : p) scale = std::max(scale, std::abs(v));
  if (hi - lo < 1e-9 * std::max(1.0, scale)) return fit;  // flat: degenerate

  auto sse = [&](double d) {
    double s = 0.0;
    for (size_t k = 1; k < times.size(); ++k) {
      const auto model = diffuse_profile(init, d * (times[k] - times[0]));
      for (size_t x = 0; x < model.size(); ++x) {
        const double e = model[x] - profiles[k][x];
        s += e * e;
      }
    }
    return s;
  };
  // golden-section minimize over D in [0, d_hi]
  double a = 0.0, b = 10.0 * g;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  double f1 = sse(c1), f2 = sse(c2);
  for (int it = 0; it < 120; ++it) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = sse(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = sse(c2);
    }
  }
  const double d_opt = 0.5 * (a + b);
  double mean = 0.0;
  int cnt = 0;
  for (size_t k = 1; k < times.size(); ++k)
    for (double v : profiles[k]) {
      mean += v;
      ++cnt;
    }
  mean /= cnt;
  double sstot = 0.0;
  for (size_t k = 1; k < times.size(); ++k)
    for (double v : profiles[k]) sstot += (v - mean) * (v - mean);
  const double ssres = sse(d_opt);
  fit.diffusion = d_opt / g;
  fit.r_squared = sstot > 0 ? 1.0 - ssres / sstot : 0.0;
  fit.diffusion_valid = d_opt > 1e-12;
  if (d_opt <= 1e-12) fit.diffusion = 0.0;
  return fit;
}

TransportFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                            double t_lo, double t_hi, double g) {
  TransportFit fit;
  fit.window_lo = t_lo;
  fit.window_hi = t_hi;
  std::vector<double> xs, ys;
  for (size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t_lo && times[i] <= t_hi && values[i] > 0.0) {
      xs.push_back(times[i]);
      ys.push_back(std::log(values[i]));
    }
  if (xs.size() < 3) return fit;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-30) return fit;
  const double slope = (n * sxy - sx * sy) / det;
  const double icpt = (sy - slope * sx) / n;
  double ss = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (icpt + slope * xs[i]);
    ss += e * e;
  }
  fit.decay_rate = -slope / g;
  fit.decay_resid = std::sqrt(ss / n);
  fit.decay_valid = slope < 0.0;
  return fit;
}

}  // namespace xysim
