#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xysim/io.hpp"
#include "xysim/noise.hpp"
#include "xysim/observables.hpp"
#include "xysim/propagator.hpp"
#include "xysim/rng.hpp"

using namespace xysim;

TEST_SUITE_BEGIN("noise");

TEST_CASE("depolarizing channel identities") {
  std::vector<double> p(256);
  double norm = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = exp_deviate(hash_mix(3, i));
    norm += p[i];
  }
  for (auto& v : p) v /= norm;

  const auto same = apply_depolarizing(p, 1.0);
  for (size_t i = 0; i < p.size(); ++i) CHECK(same[i] == doctest::Approx(p[i]));

  const auto flat = apply_depolarizing(p, 0.0);
  for (double v : flat) CHECK(v == doctest::Approx(1.0 / 256));

  const double phi = 0.6;
  const auto mixed = apply_depolarizing(p, phi);
  CHECK(self_xeb_of_probs(mixed) ==
        doctest::Approx(phi * phi * self_xeb_of_probs(p)).epsilon(1e-12));

  CHECK_THROWS_AS(apply_depolarizing(p, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_depolarizing(p, -0.1), std::invalid_argument);
}

TEST_CASE("corrupt_samples limit cases") {
  SampleSet s;
  s.n_q = 6;
  s.m = 3;
  s.add(0b010101, 4000);
  s.add(0b101010, 4000);
  s.finalize();

  const auto identity = ReadoutModel::symmetric(6, 0.0, 0.0);
  const auto same = corrupt_samples(s, identity, 5);
  CHECK(same.counts == s.counts);
  CHECK_FALSE(same.in_sector);

  // deterministic inverter: p(1|0) = p(0|1) = 1
  ReadoutModel inverter;
  inverter.beta.assign(6, ReadoutModel::Beta{0.0, 1.0, 1.0, 0.0});
  const auto flipped = corrupt_samples(s, inverter, 5);
  REQUIRE(flipped.counts.size() == 2);
  CHECK(flipped.counts[0].first == 0b010101);
  CHECK(flipped.counts[0].second == 4000);

  // photon decay shrinks the mean weight
  const auto decayed = corrupt_samples(s, ReadoutModel::symmetric(6, 0.0, 0.05), 6);
  double mean_weight = 0.0;
  for (const auto& [bits, c] : decayed.counts) mean_weight += std::popcount(bits) * double(c);
  mean_weight /= decayed.total;
  CHECK(mean_weight == doctest::Approx(3.0 * 0.95).epsilon(0.02));
}

TEST_CASE("corrupted frequencies match the explicit channel matrix") {
  // 4 qubits, one fixed input string, compare against the analytic product
  // channel probabilities
  SampleSet s;
  s.n_q = 4;
  s.m = 2;
  const uint64_t input = 0b0110;
  s.add(input, 200000);
  s.finalize();
  ReadoutModel model;
  model.beta.assign(4, ReadoutModel::Beta{0.97, 0.08, 0.03, 0.92});
  model.p_decay = 0.0;
  const auto noisy = corrupt_samples(s, model, 11);
  for (uint64_t out = 0; out < 16; ++out) {
    double expect = 1.0;
    for (int q = 0; q < 4; ++q) {
      const int truth = (input >> q) & 1;
      const int meas = (out >> q) & 1;
      const auto& b = model.beta[q];
      expect *= truth ? (meas ? b.p11 : b.p01) : (meas ? b.p10 : b.p00);
    }
    double freq = 0.0;
    for (const auto& [bits, c] : noisy.counts)
      if (bits == out) freq = double(c) / noisy.total;
    const double sigma = std::sqrt(expect * (1 - expect) / noisy.total);
    CHECK(std::abs(freq - expect) < 5.0 * sigma + 1e-5);
  }
}

TEST_CASE("pair gamma channel") {
  SampleSet s;
  s.n_q = 2;
  s.m = 1;
  s.add(0b01, 100000);
  s.finalize();
  ReadoutModel model;
  model.beta.assign(2, ReadoutModel::Beta{});
  ReadoutModel::PairGamma g;
  g.i = 0;
  g.j = 1;
  // column-stochastic: columns indexed by the true state (i bit + 2*j bit)
  for (auto& v : g.p) v = 0.0;
  // true 01 (i=1, j=0 -> index 1): measured mostly 01, sometimes 10
  g.p[0 * 4 + 0] = 1.0;
  g.p[1 * 4 + 1] = 0.9;
  g.p[2 * 4 + 1] = 0.1;
  g.p[2 * 4 + 2] = 1.0;
  g.p[3 * 4 + 3] = 1.0;
  model.gamma.push_back(g);
  const auto noisy = corrupt_samples(s, model, 3);
  double f01 = 0.0, f10 = 0.0;
  for (const auto& [bits, c] : noisy.counts) {
    if (bits == 0b01) f01 = double(c) / noisy.total;
    if (bits == 0b10) f10 = double(c) / noisy.total;
  }
  CHECK(f01 == doctest::Approx(0.9).epsilon(0.02));
  CHECK(f10 == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("markov correction restores marginals") {
  const int n_q = 8;
  auto basis = enumerate_sector(n_q, 4);
  StateVector psi = StateVector::random_gaussian(basis, 7);
  const auto clean = sample(psi, 300000, 9);
  // per-qubit occupation of the clean distribution
  auto marginals = [&](const SampleSet& s) {
    std::vector<double> m(n_q, 0.0);
    for (const auto& [bits, c] : s.counts)
      for (int q = 0; q < n_q; ++q)
        if ((bits >> q) & 1) m[q] += double(c);
    for (auto& v : m) v /= s.total;
    return m;
  };
  const auto m_clean = marginals(clean);
  const auto model = ReadoutModel::symmetric(n_q, 0.02, 0.0);
  const auto noisy = corrupt_samples(clean, model, 13);
  const auto m_noisy = marginals(noisy);
  const auto fixed = correct_markov(noisy, model, 17);
  const auto m_fixed = marginals(fixed);
  for (int q = 0; q < n_q; ++q) {
    // the noisy marginal is measurably shifted; the corrected one is not
    const double shift = m_clean[q] * (1 - 0.02) + (1 - m_clean[q]) * 0.02 - m_clean[q];
    CHECK(std::abs(m_noisy[q] - m_clean[q] - shift) < 3e-3);
    CHECK(std::abs(m_fixed[q] - m_clean[q]) < 3e-3);
  }

  const auto identity = ReadoutModel::symmetric(n_q, 0.0, 0.0);
  const auto same = correct_markov(noisy, identity, 21);
  CHECK(same.counts == noisy.counts);

  ReadoutModel singular;
  singular.beta.assign(n_q, ReadoutModel::Beta{0.5, 0.5, 0.5, 0.5});
  CHECK_THROWS_AS(correct_markov(noisy, singular, 5), std::invalid_argument);
}

TEST_CASE("postselection") {
  SampleSet s;
  s.n_q = 6;
  s.m = 3;
  s.add(0b010101, 100);
  s.finalize();
  const auto clean = postselect(s, 3);
  CHECK(clean.retention == doctest::Approx(1.0));

  // binomial survival under decay
  auto basis = enumerate_sector(16, 8);
  StateVector psi = StateVector::random_gaussian(basis, 19);
  const auto shots = sample(psi, 100000, 23);
  const auto decayed = corrupt_samples(shots, ReadoutModel::symmetric(16, 0.0, 0.05), 29);
  const auto post = postselect(decayed, 8);
  CHECK(post.retention == doctest::Approx(std::pow(0.95, 8)).epsilon(0.03));

  // correction tightens the weight distribution when readout errors ride on
  // top of decay, so retention goes up
  const auto model = ReadoutModel::symmetric(16, 0.02, 0.05);
  const auto noisy2 = corrupt_samples(shots, model, 31);
  const auto post_raw = postselect(noisy2, 8);
  const auto post_fixed = postselect(correct_markov(noisy2, model, 37), 8);
  CHECK(post_fixed.retention > post_raw.retention);

  const auto empty = postselect(s, 5);
  CHECK(empty.empty);
  CHECK(empty.retention == doctest::Approx(0.0));
}

TEST_CASE("bell conversion decodes the table rows") {
  auto lat = build_rect_lattice(2, 1);

  // |00>: outcome 00, zero photons
  auto b0 = enumerate_sector(2, 0);
  StateVector vac = StateVector::basis_state(b0, 0);
  const auto s00 = bell_convert(vac, *lat, {{0, 1}}, 2000, 3);
  REQUIRE(s00.counts.size() == 1);
  CHECK(s00.counts[0].first == 0);
  const auto d00 = bell_decode(s00, {{0, 1}});
  CHECK(d00.bond_energy[0] == doctest::Approx(0.0));
  CHECK(d00.mean_total_photons == doctest::Approx(0.0));

  auto b1 = enumerate_sector(2, 1);
  StateVector singlet(b1);
  singlet.amp[b1->rank(0b10)] = 1.0 / std::sqrt(2.0);   // |01>: site 1 occupied
  singlet.amp[b1->rank(0b01)] = -1.0 / std::sqrt(2.0);  // |10>: site 0 occupied
  const auto ss = bell_convert(singlet, *lat, {{0, 1}}, 2000, 5);
  REQUIRE(ss.counts.size() == 1);
  CHECK(ss.counts[0].first == 0b10);  // outcome 01 in site order (b_i=0, b_j=1)
  const auto ds = bell_decode(ss, {{0, 1}});
  CHECK(ds.bond_energy[0] == doctest::Approx(-1.0));
  CHECK(ds.mean_total_photons == doctest::Approx(1.0));

  StateVector triplet(b1);
  triplet.amp[b1->rank(0b10)] = 1.0 / std::sqrt(2.0);
  triplet.amp[b1->rank(0b01)] = 1.0 / std::sqrt(2.0);
  const auto st = bell_convert(triplet, *lat, {{0, 1}}, 2000, 7);
  REQUIRE(st.counts.size() == 1);
  CHECK(st.counts[0].first == 0b01);  // outcome 10
  const auto dt = bell_decode(st, {{0, 1}});
  CHECK(dt.bond_energy[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(bell_convert(singlet, *lat, {{0, 1}, {0, 1}}, 10, 3), std::invalid_argument);
}

TEST_CASE("bell energy matches the direct expectation") {
  auto lat = build_rect_lattice(3, 2);
  SpinHamiltonian h(lat);
  std::fill(h.hop.begin(), h.hop.end(), 0.1);
  auto basis = enumerate_sector(6, 3);
  StateVector psi = StateVector::basis_state(basis, 0b010101);
  psi = evolve_chebyshev(h, psi, 80.0).state;

  const auto coverings = bond_coverings(*lat);
  for (size_t cix = 0; cix < coverings.size(); ++cix) {
    const auto& cov = coverings[cix];
    const auto s = bell_convert(psi, *lat, cov, 400000, 100 + cix);
    const auto dec = bell_decode(s, cov);
    for (size_t k = 0; k < cov.size(); ++k) {
      const double direct = 2.0 * pair_coherence(psi, cov[k][0], cov[k][1]).real();
      CHECK(std::abs(dec.bond_energy[k] - direct) < 0.02);
    }
  }
}

TEST_CASE("bond coverings partition the bonds") {
  auto lat = build_rect_lattice(4, 4);
  const auto families = bond_coverings(*lat);
  size_t total = 0;
  for (const auto& f : families) {
    total += f.size();
    std::vector<bool> used(lat->n_sites(), false);
    for (const auto& [i, j] : f) {
      CHECK_FALSE(used[i]);
      CHECK_FALSE(used[j]);
      used[i] = used[j] = true;
      CHECK(lat->adjacent(i, j));
    }
  }
  CHECK(total == lat->bonds.size());
}

TEST_CASE("readout model csv loader") {
  const std::string path = "readout_test.csv";
  {
    std::string text = "# per-qubit rows\nqubit,0,0.02,0.01\nqubit,1,0.03,0.04\ndecay,0.05\n";
    write_text_file_atomic(path, text);
  }
  const auto m = load_readout_csv(path, 2);
  CHECK(m.beta[0].p01 == doctest::Approx(0.02));
  CHECK(m.beta[0].p10 == doctest::Approx(0.01));
  CHECK(m.beta[1].p01 == doctest::Approx(0.03));
  CHECK(m.p_decay == doctest::Approx(0.05));
  std::remove(path.c_str());
}

TEST_SUITE_END();
