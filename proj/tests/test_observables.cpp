#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "xysim/observables.hpp"
#include "xysim/propagator.hpp"

using namespace xysim;

TEST_SUITE_BEGIN("observables");

TEST_CASE("pair correlators on product and dimer states") {
  auto lat = build_rect_lattice(4, 1);
  auto basis = enumerate_sector(4, 2);
  // Neel-like product state: no off-diagonal coherence
  StateVector neel = StateVector::basis_state(basis, 0b0101);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(std::abs(pair_coherence(neel, i, j)) < 1e-14);

  // singlet on (0,1), site 2,3 empty... use sites 0-1 and 2-3 dimers
  StateVector dimers(basis);
  // (|01>-|10>)/sqrt2 on (0,1) x (|01>-|10>)/sqrt2 on (2,3)
  const double inv2 = 0.5;
  dimers.amp[basis->rank(0b0101)] = inv2;   // site0, site2
  dimers.amp[basis->rank(0b1001)] = -inv2;  // site0, site3
  dimers.amp[basis->rank(0b0110)] = -inv2;  // site1, site2
  dimers.amp[basis->rank(0b1010)] = inv2;   // site1, site3
  CHECK(2.0 * pair_coherence(dimers, 0, 1).real() == doctest::Approx(-1.0));
  CHECK(2.0 * pair_coherence(dimers, 2, 3).real() == doctest::Approx(-1.0));
  CHECK(std::abs(pair_coherence(dimers, 0, 2)) < 1e-14);
  CHECK(std::abs(pair_coherence(dimers, 1, 3)) < 1e-14);
}

TEST_CASE("pair correlators match the dense operator oracle") {
  auto lat = build_rect_lattice(5, 2);
  auto basis = enumerate_sector(10, 5);
  StateVector psi = StateVector::random_gaussian(basis, 151);
  const oracle::Vec v = oracle::to_eigen(psi);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    const int i = static_cast<int>(rng() % 10);
    int j = static_cast<int>(rng() % 10);
    if (i == j) continue;
    // embed into the full space for the oracle
    const auto op = oracle::exchange_half(10, i, j);
    oracle::Vec full = oracle::Vec::Zero(1 << 10);
    for (uint64_t r = 0; r < psi.dim(); ++r) full(basis->unrank(r)) = psi.amp[r];
    const double expect = (full.adjoint() * op * full)(0).real();
    CHECK(2.0 * pair_coherence(psi, i, j).real() == doctest::Approx(expect).epsilon(1e-10));
    // U(1): <XX> equals <YY> on any in-sector state
    const auto xx = oracle::embed(10, i, oracle::pauli_x()) * oracle::embed(10, j, oracle::pauli_x());
    const auto yy = oracle::embed(10, i, oracle::pauli_y()) * oracle::embed(10, j, oracle::pauli_y());
    const double exx = (full.adjoint() * xx * full)(0).real();
    const double eyy = (full.adjoint() * yy * full)(0).real();
    CHECK(std::abs(exx - eyy) < 1e-10);
    // single-site coherences vanish identically
    const auto xi = oracle::embed(10, i, oracle::pauli_x());
    CHECK(std::abs((full.adjoint() * xi * full)(0)) < 1e-12);
  }
}

TEST_CASE("two_point map and radial profile") {
  auto lat = build_rect_lattice(3, 2);
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 8);
  const auto rep = two_point(psi, *lat);
  CHECK(rep.g_map.at({0, 0}) == doctest::Approx(1.0));
  // map symmetric under r -> -r
  for (const auto& [key, val] : rep.g_map)
    CHECK(rep.g_map.at({-key.first, -key.second}) == doctest::Approx(val));
}

TEST_CASE("planted decay fits") {
  std::vector<double> r, g_exp, g_pow;
  for (int k = 1; k <= 6; ++k) {
    r.push_back(k);
    g_exp.push_back(0.5 * std::exp(-k / 2.0));
    g_pow.push_back(std::pow(k, -0.25));
  }
  const auto fe = fit_correlation_decay(r, g_exp, 6.0);
  CHECK(fe.exp_valid);
  CHECK(fe.xi == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fe.eps_exp < 1e-9);
  const auto fp = fit_correlation_decay(r, g_pow, 6.0);
  CHECK(fp.pow_valid);
  CHECK(fp.gamma == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(fp.eps_pow < 1e-9);

  // scale consistency: overall factor shifts only the intercept
  std::vector<double> scaled = g_exp;
  for (auto& v : scaled) v *= 7.3;
  const auto fs = fit_correlation_decay(r, scaled, 6.0);
  CHECK(fs.xi == doctest::Approx(fe.xi).epsilon(1e-9));
  const auto fps = [&] {
    std::vector<double> sp = g_pow;
    for (auto& v : sp) v *= 0.11;
    return fit_correlation_decay(r, sp, 6.0);
  }();
  CHECK(fps.gamma == doctest::Approx(fp.gamma).epsilon(1e-9));

  // fewer than 3 usable points: invalid, no throw
  const auto bad = fit_correlation_decay({1.0, 2.0}, {0.5, 0.2}, 6.0);
  CHECK_FALSE(bad.exp_valid);
}

TEST_CASE("vortex density on simple states") {
  auto lat = build_rect_lattice(2, 2);
  // Neel on one plaquette
  auto b2 = enumerate_sector(4, 2);
  uint64_t neel = 0;
  for (int i = 0; i < 4; ++i)
    if (lat->sublattice_parity[i] > 0) neel |= 1ULL << i;
  const StateVector psi = StateVector::basis_state(b2, neel);
  CHECK(vortex_density(psi, *lat) == doctest::Approx(-0.25));

  // brute-force oracle: expectation of the literal product operator
  {
    const auto& p = lat->plaquettes[0];
    const int n = 4;
    const auto X = [&](int s) { return oracle::embed(n, s, oracle::pauli_x()); };
    const auto Y = [&](int s) { return oracle::embed(n, s, oracle::pauli_y()); };
    const oracle::Mat id = oracle::Mat::Identity(16, 16);
    const oracle::Mat fac1 = id - X(p[0]) * X(p[2]) - Y(p[1]) * Y(p[3]);
    const oracle::Mat fac2 = id - Y(p[0]) * Y(p[2]) - X(p[1]) * X(p[3]);
    oracle::Vec full = oracle::Vec::Zero(16);
    full(neel) = 1.0;
    const double expect = (full.adjoint() * fac1 * fac2 * full)(0).real() / 4.0;
    CHECK(expect == doctest::Approx(-0.25));
    CHECK(vortex_density(psi, *lat) == doctest::Approx(expect));
  }

  // vacuum state
  auto b0 = enumerate_sector(4, 0);
  const StateVector vac = StateVector::basis_state(b0, 0);
  CHECK(vortex_density(vac, *lat) == doctest::Approx(-0.25));

  auto chain = build_rect_lattice(4, 1);
  CHECK_THROWS_AS(vortex_density(psi, *chain), std::invalid_argument);
}

TEST_CASE("vortex density matches the dense oracle on a random state") {
  auto lat = build_rect_lattice(3, 2);
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 77);
  oracle::Vec full = oracle::Vec::Zero(1 << 6);
  for (uint64_t r = 0; r < psi.dim(); ++r) full(basis->unrank(r)) = psi.amp[r];
  const auto X = [&](int s) { return oracle::embed(6, s, oracle::pauli_x()); };
  const auto Y = [&](int s) { return oracle::embed(6, s, oracle::pauli_y()); };
  const oracle::Mat id = oracle::Mat::Identity(64, 64);
  double total = 0.0;
  for (const auto& p : lat->plaquettes) {
    const oracle::Mat op = (id - X(p[0]) * X(p[2]) - Y(p[1]) * Y(p[3])) *
                           (id - Y(p[0]) * Y(p[2]) - X(p[1]) * X(p[3]));
    total += (full.adjoint() * op * full)(0).real();
  }
  const double expect = total / (4.0 * lat->n_plaquettes());
  CHECK(vortex_density(psi, *lat) == doctest::Approx(expect).epsilon(1e-10));

  // vorticity map against the dense one-plaquette operator
  const auto rep = vorticity_and_current(psi, *lat);
  for (size_t k = 0; k < lat->plaquettes.size(); ++k) {
    const auto& p = lat->plaquettes[k];
    const oracle::Mat v_op = 0.25 * (X(p[0]) * Y(p[1]) - Y(p[1]) * X(p[2]) +
                                     X(p[2]) * Y(p[3]) - Y(p[3]) * X(p[0]));
    const double expect_v = (full.adjoint() * v_op * full)(0).real();
    CHECK(rep.vorticity_map[k] == doctest::Approx(expect_v).epsilon(1e-10));
  }
}

TEST_CASE("spin current of a phased dimer") {
  auto lat = build_rect_lattice(2, 1);
  auto basis = enumerate_sector(2, 1);
  StateVector dimer(basis);
  // (|01> + i|10>)/sqrt2 with bit0 = site 0: |01> means site 1 occupied
  dimer.amp[basis->rank(0b10)] = 1.0 / std::sqrt(2.0);
  dimer.amp[basis->rank(0b01)] = cplx(0.0, 1.0) / std::sqrt(2.0);
  const auto rep = vorticity_and_current(dimer, *lat);
  CHECK(std::abs(rep.spin_current_map[0]) == doctest::Approx(1.0));

  // Z-basis product states carry no current
  StateVector prod = StateVector::basis_state(basis, 0b01);
  const auto rep0 = vorticity_and_current(prod, *lat);
  CHECK(std::abs(rep0.spin_current_map[0]) < 1e-14);
}

TEST_CASE("energy report") {
  auto lat = build_rect_lattice(4, 1);
  XYEnergyObservable hxy{lat, 1.0};
  auto basis = enumerate_sector(4, 2);

  // two singlets covering bonds (0,1) and (2,3)
  StateVector dimers(basis);
  dimers.amp[basis->rank(0b0101)] = 0.5;
  dimers.amp[basis->rank(0b1001)] = -0.5;
  dimers.amp[basis->rank(0b0110)] = -0.5;
  dimers.amp[basis->rank(0b1010)] = 0.5;
  const auto rep = energy(dimers, hxy);
  CHECK(rep.eps == doctest::Approx(-2.0 / 3.0));  // two covered bonds of three
  CHECK(rep.per_bond[0] == doctest::Approx(-1.0));
  CHECK(rep.per_bond[2] == doctest::Approx(-1.0));

  // eigenstate of H_XY has zero energy variance: use the singlet pair alone
  auto lat2 = build_rect_lattice(2, 1);
  XYEnergyObservable hxy2{lat2, 1.0};
  auto b2 = enumerate_sector(2, 1);
  StateVector singlet(b2);
  singlet.amp[b2->rank(0b01)] = 1.0 / std::sqrt(2.0);
  singlet.amp[b2->rank(0b10)] = -1.0 / std::sqrt(2.0);
  const auto rep2 = energy(singlet, hxy2);
  CHECK(rep2.sigma_eps == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep2.eps == doctest::Approx(-1.0));
}

TEST_CASE("sigma_eps matches the dense oracle") {
  auto lat = build_rect_lattice(3, 2);
  XYEnergyObservable hxy{lat, 1.0};
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 31);
  const auto dense = oracle::sector_dense(hxy.as_hamiltonian(), *basis);
  const oracle::Vec v = oracle::to_eigen(psi);
  const double e = (v.adjoint() * dense * v)(0).real();
  const double e2 = (v.adjoint() * dense * dense * v)(0).real();
  const auto rep = energy(psi, hxy);
  CHECK(rep.eps == doctest::Approx(e / lat->n_bonds()).epsilon(1e-10));
  CHECK(rep.sigma_eps ==
        doctest::Approx(std::sqrt(e2 - e * e) / lat->n_bonds()).epsilon(1e-8));
}

TEST_CASE("diffusion model fits") {
  const double g = 0.0628;
  const double d_plant = 0.5 * g;
  // synthetic column profiles generated by the model itself
  const int L = 6;
  std::vector<double> init = {1.0, 0.8, 0.2, -0.3, -0.8, -0.9};
  std::vector<double> times;
  std::vector<std::vector<double>> profiles;
  for (int k = 0; k < 8; ++k) {
    const double t = 4.0 * k;
    times.push_back(t);
    // propagate with the same cosine-mode construction
    std::vector<double> prof(L, 0.0);
    for (int mode = 0; mode < L; ++mode) {
      double coef = 0.0;
      for (int x = 0; x < L; ++x) coef += init[x] * std::cos(M_PI * mode * (x + 0.5) / L);
      coef *= (mode == 0 ? 1.0 : 2.0) / L;
      const double lam = -4.0 * std::pow(std::sin(M_PI * mode / (2.0 * L)), 2);
      for (int x = 0; x < L; ++x)
        prof[x] += coef * std::exp(lam * d_plant * t) * std::cos(M_PI * mode * (x + 0.5) / L);
    }
    profiles.push_back(prof);
  }
  const auto fit = fit_diffusion(times, profiles, g);
  CHECK(fit.diffusion_valid);
  CHECK(fit.diffusion == doctest::Approx(0.5).epsilon(0.01));
  CHECK(fit.r_squared > 0.999);

  // flat profiles are degenerate
  std::vector<std::vector<double>> flat(times.size(), std::vector<double>(L, 0.4));
  const auto bad = fit_diffusion(times, flat, g);
  CHECK_FALSE(bad.diffusion_valid);
  CHECK(bad.diffusion == 0.0);
}

TEST_CASE("exponential decay rate fit") {
  const double g = 0.0628;
  std::vector<double> times, values;
  for (int k = 0; k < 20; ++k) {
    times.push_back(2.0 * k);
    values.push_back(0.8 * std::exp(-0.85 * g * 2.0 * k));
  }
  const auto fit = fit_decay_rate(times, values, 0.0, 40.0, g);
  CHECK(fit.decay_valid);
  CHECK(fit.decay_rate == doctest::Approx(0.85).epsilon(1e-6));
}

TEST_SUITE_END();
