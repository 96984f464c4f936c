#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xysim/propagator.hpp"

using namespace xysim;

TEST_SUITE_BEGIN("propagator");

TEST_CASE("bessel recurrence against the standard library") {
  for (double tau : {0.5, 5.0, 50.0}) {
    const auto j = bessel_j_array(tau, 80);
    for (int m = 0; m <= 20; ++m)
      CHECK(j[m] == doctest::Approx(std::cyl_bessel_j(m, tau)).epsilon(1e-10));
  }
  const auto j0 = bessel_j_array(0.0, 5);
  CHECK(j0[0] == 1.0);
  CHECK(j0[1] == 0.0);
}

TEST_CASE("zero generator is the identity") {
  auto lat = build_rect_lattice(2, 2);
  SpinHamiltonian h(lat);  // all coefficients zero
  auto basis = enumerate_sector(4, 2);
  StateVector psi = StateVector::random_gaussian(basis, 3);
  const auto res = evolve_chebyshev(h, psi, 17.0);
  for (uint64_t i = 0; i < psi.dim(); ++i)
    CHECK(std::abs(res.state.amp[i] - psi.amp[i]) < 1e-12);
}

TEST_CASE("two-site half swap") {
  auto lat = build_rect_lattice(2, 1);
  SpinHamiltonian h(lat);
  const double g = 0.21;
  h.hop[0] = g;
  auto basis = enumerate_sector(2, 1);
  StateVector psi = StateVector::basis_state(basis, 0b01);
  const double t = M_PI / (2.0 * g);
  const auto res = evolve_chebyshev(h, psi, t);
  // e^{-iHt}|10> = cos(gt)|10> - i sin(gt)|01>; full swap up to phase
  CHECK(std::abs(res.state.amp[basis->rank(0b10)]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(res.state.amp[basis->rank(0b01)]) < 1e-8);
}

TEST_CASE("chebyshev matches dense exponential at 12 qubits") {
  auto lat = build_rect_lattice(4, 3);
  const auto h = oracle::random_hamiltonian(lat, 0.35, 7);
  auto basis = enumerate_sector(12, 6);
  StateVector psi = StateVector::random_gaussian(basis, 21);
  const double g = 0.35;
  const double t = 3.0 / g;
  const auto res = evolve_chebyshev(h, psi, t);
  CHECK(std::abs(res.state.norm() - 1.0) < 1e-10);
  const auto dense = oracle::sector_dense(h, *basis);
  const oracle::Vec expect = oracle::expm_apply(dense, oracle::to_eigen(psi), t);
  double dist2 = 0.0;
  for (uint64_t i = 0; i < psi.dim(); ++i) dist2 += std::norm(res.state.amp[i] - expect(i));
  CHECK(std::sqrt(dist2) < 1e-8);
}

TEST_CASE("chained checkpoints reuse the running state") {
  auto lat = build_rect_lattice(3, 2);
  const auto h = oracle::random_hamiltonian(lat, 0.3, 9);
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 5);
  const auto states = evolve_chebyshev_checkpoints(h, psi, {5.0, 12.0, 30.0});
  const auto direct = evolve_chebyshev(h, psi, 30.0);
  double dist2 = 0.0;
  for (uint64_t i = 0; i < psi.dim(); ++i)
    dist2 += std::norm(states[2].amp[i] - direct.state.amp[i]);
  CHECK(std::sqrt(dist2) < 1e-9);
}

TEST_CASE("energy and excitation conservation") {
  auto lat = build_rect_lattice(3, 3);
  const auto h = oracle::random_hamiltonian(lat, 0.4, 13);
  auto basis = enumerate_sector(9, 4);
  StateVector psi = StateVector::random_gaussian(basis, 8);
  const double e0 = expectation(h, psi);
  const auto res = evolve_chebyshev(h, psi, 25.0);
  const double e1 = expectation(h, res.state);
  const auto bound = bandwidth_bound(h, 4);
  CHECK(std::abs(e1 - e0) < 1e-8 * std::max(1.0, bound[1] - bound[0]));
  CHECK(std::abs(res.state.norm() - 1.0) < 1e-10);
}

TEST_CASE("matvec budget") {
  auto lat = build_rect_lattice(2, 1);
  SpinHamiltonian h(lat);
  h.hop[0] = 1.0;  // bandwidth bound [-1, 1], W = 2
  auto basis = enumerate_sector(2, 1);

  ChebyshevPlan plan0 = build_chebyshev_plan(h, 1, 0.0);
  CHECK(matvec_budget(plan0) == 1);

  ChebyshevPlan plan200 = build_chebyshev_plan(h, 1, 100.0);  // tau = 200
  CHECK(plan200.tau == doctest::Approx(200.0));
  CHECK(matvec_budget(plan200) == 272);

  for (double tau : {50.0, 200.0}) {
    StateVector psi = StateVector::basis_state(basis, 0b01);
    const auto res = evolve_chebyshev(h, psi, tau / 2.0);
    const auto budget = matvec_budget(res.plan);
    CHECK(res.matvecs <= 1.5 * budget);
    CHECK(res.matvecs >= budget / 1.5);
  }
}

TEST_CASE("rk45 agrees with chebyshev on a constant schedule") {
  auto lat = build_rect_lattice(3, 2);
  RampSchedule sched;
  sched.base = oracle::random_hamiltonian(lat, 0.3, 31);
  sched.g_reference = 1.0;
  sched.waypoints = {{0.0, 0.0, 1.0}, {20.0, 0.0, 1.0}};  // constant knobs
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 77);
  OdeControl ctrl;
  const auto ramp = evolve_ramp(sched, psi, {20.0}, ctrl);
  const auto cheb = evolve_chebyshev(sched.base, psi, 20.0);
  double dist2 = 0.0;
  for (uint64_t i = 0; i < psi.dim(); ++i)
    dist2 += std::norm(ramp.checkpoints[0].amp[i] - cheb.state.amp[i]);
  CHECK(std::sqrt(dist2) < 1e-7);
}

TEST_CASE("zero-duration ramp returns the input") {
  auto lat = build_rect_lattice(2, 2);
  RampSchedule sched;
  sched.base = SpinHamiltonian(lat);
  std::fill(sched.base.hop.begin(), sched.base.hop.end(), 0.1);
  sched.g_reference = 0.1;
  sched.waypoints = {{0.0, 0.2, 0.0}, {0.0, 0.0, 0.1}};
  auto basis = enumerate_sector(4, 2);
  StateVector psi = StateVector::random_gaussian(basis, 4);
  OdeControl ctrl;
  const auto res = evolve_ramp(sched, psi, {0.0}, ctrl);
  for (uint64_t i = 0; i < psi.dim(); ++i)
    CHECK(std::abs(res.checkpoints[0].amp[i] - psi.amp[i]) < 1e-14);
}

TEST_CASE("adiabatic ramp reaches the sector ground state at 4 qubits") {
  auto lat = build_rect_lattice(2, 2);
  RampSchedule sched;
  sched.base = SpinHamiltonian(lat);
  const double gm = mhz_to_radns(20.0);
  std::fill(sched.base.hop.begin(), sched.base.hop.end(), gm);
  sched.g_reference = gm;
  const double h0 = mhz_to_radns(30.0);
  const double t_r = 600.0;  // deep adiabatic regime
  sched.waypoints = {{0.0, h0, 0.0}, {t_r, 0.0, gm}};

  auto basis = enumerate_sector(4, 2);
  uint64_t neel = 0;
  for (int i = 0; i < 4; ++i)
    if (lat->sublattice_parity[i] < 0) neel |= 1ULL << i;
  StateVector psi = StateVector::basis_state(basis, neel);
  OdeControl ctrl;
  const auto res = evolve_ramp(sched, psi, {t_r}, ctrl);
  const SpinHamiltonian h_end = schedule_eval(sched, t_r);
  const double e_final = expectation(h_end, res.checkpoints[0]);
  const auto dense = oracle::sector_dense(h_end, *basis);
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(dense);
  const double e_gs = es.eigenvalues()(0);
  const double gap = es.eigenvalues()(1) - e_gs;
  CHECK(e_final - e_gs < 0.05 * gap);
}

TEST_CASE("cfm4 matches rk45 on a time-dependent ramp") {
  auto lat = build_rect_lattice(3, 2);
  RampSchedule sched;
  sched.base = SpinHamiltonian(lat);
  const double gm = mhz_to_radns(20.0);
  std::fill(sched.base.hop.begin(), sched.base.hop.end(), gm);
  sched.g_reference = gm;
  sched.waypoints = {{0.0, mhz_to_radns(30.0), 0.0}, {25.0, 0.0, gm}};
  auto basis = enumerate_sector(6, 3);
  uint64_t neel = 0;
  for (int i = 0; i < 6; ++i)
    if (lat->sublattice_parity[i] < 0) neel |= 1ULL << i;
  StateVector psi = StateVector::basis_state(basis, neel);

  OdeControl fine;
  fine.rel_tol = 1e-12;
  fine.abs_tol = 1e-13;
  fine.max_step = 0.5;
  const auto ref = evolve_ramp(sched, psi, {25.0}, fine);

  auto err_at = [&](double dt) {
    OdeControl ctrl;
    ctrl.integrator = RampIntegrator::cfm4;
    ctrl.cfm_dt = dt;
    const auto res = evolve_ramp(sched, psi, {25.0}, ctrl);
    double d2 = 0.0;
    for (uint64_t i = 0; i < psi.dim(); ++i)
      d2 += std::norm(res.checkpoints[0].amp[i] - ref.checkpoints[0].amp[i]);
    return std::sqrt(d2);
  };
  const double e1 = err_at(2.5);
  const double e2 = err_at(1.25);
  CHECK(e1 < 1e-5);
  CHECK(e2 < e1 / 8.0);  // fourth-order step scaling
}

TEST_CASE("norm gate rejects a too-loose ramp") {
  auto lat = build_rect_lattice(3, 2);
  RampSchedule sched;
  sched.base = SpinHamiltonian(lat);
  std::fill(sched.base.hop.begin(), sched.base.hop.end(), 0.4);
  sched.g_reference = 0.4;
  sched.waypoints = {{0.0, 0.6, 0.0}, {80.0, 0.0, 0.4}};
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::random_gaussian(basis, 12);
  OdeControl loose;
  loose.rel_tol = 1e-3;
  loose.abs_tol = 1e-4;
  loose.norm_drift_limit = 1e-10;
  CHECK_THROWS_AS(evolve_ramp(sched, psi, {80.0}, loose), NumericalError);
}

TEST_SUITE_END();
