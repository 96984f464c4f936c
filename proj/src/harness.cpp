#include "xysim/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "xysim/io.hpp"
#include "xysim/parallel.hpp"
#include "xysim/rng.hpp"

namespace xysim {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "xysim 0.1.0";

struct ResultWriter {
  fs::path dir;
  explicit ResultWriter(const std::string& out_dir) : dir(out_dir) {
    fs::create_directories(dir);
    fs::create_directories(dir / "samples");
  }
  void write(const std::string& name, const std::string& content) const {
    write_text_file_atomic((dir / name).string(), content);
  }
  void write_summary(const json& j) const { write("summary.json", j.dump(2) + "\n"); }
  void write_manifest(const Config& cfg, uint64_t seed) const {
    std::ostringstream os;
    os << "version=" << kVersion << "\n";
    os << "seed=" << seed << "\n";
    os << "--- config ---\n" << cfg.echo();
    write("manifest.txt", os.str());
  }
};

json reference_block() {
  const ReferenceConstants rc;
  json j;
  j["note"] = "device-scale (65-69 qubit) reference values, labels only";
  j["eps_gs"] = rc.eps_gs;
  j["eps_kt"] = rc.eps_kt;
  j["eps_kt_err"] = rc.eps_kt_err;
  j["kz_exponent"] = rc.kz_exponent;
  j["nu"] = rc.nu;
  j["z"] = rc.z;
  j["hc_over_gc"] = rc.hc_over_gc;
  j["kt_gamma"] = rc.kt_gamma;
  j["ep_ideal_intercept"] = rc.ep_ideal_intercept;
  j["diffusion_over_g"] = rc.diffusion_over_g;
  j["vorticity_decay_over_g"] = rc.vorticity_decay_over_g;
  return j;
}

json correlation_json(const CorrelationReport& rep) {
  json j;
  j["xi"] = rep.xi;
  j["gamma"] = rep.gamma;
  j["eps_exp"] = rep.eps_exp;
  j["eps_pow"] = rep.eps_pow;
  j["fit_ratio_pow_over_exp"] = rep.eps_exp > 0 ? rep.eps_pow / rep.eps_exp : 0.0;
  j["exp_fit_valid"] = rep.exp_fit_valid;
  j["pow_fit_valid"] = rep.pow_fit_valid;
  j["fit_range_max"] = rep.fit_range_max;
  j["parity_correction"] = rep.parity_correction;
  return j;
}

std::string correlation_csv(const CorrelationReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "dx,dy,g\n";
  for (const auto& [key, v] : rep.g_map) os << key.first << "," << key.second << "," << v << "\n";
  os << "\nr,g_signed,g_parity_corrected\n";
  for (size_t i = 0; i < rep.radial_r.size(); ++i)
    os << rep.radial_r[i] << "," << rep.radial_signed[i] << "," << rep.radial_corrected[i]
       << "\n";
  return os.str();
}

std::string spectrum_csv(const SchmidtSpectrum& spec) {
  std::ostringstream os;
  os.precision(12);
  os << "m_left,index,value\n";
  for (const auto& b : spec.blocks)
    for (size_t i = 0; i < b.values.size(); ++i)
      os << b.m_left << "," << i << "," << b.values[i] << "\n";
  return os.str();
}

}  // namespace

ExperimentSetup build_setup(const Config& cfg) {
  ExperimentSetup s;
  const int lx = static_cast<int>(cfg.get_int("lattice.lx"));
  const int ly = static_cast<int>(cfg.get_int("lattice.ly"));
  s.lattice = build_rect_lattice(lx, ly);
  s.g = mhz_to_radns(cfg.get_double("hamiltonian.g_mhz", 10.0));
  s.g_m = mhz_to_radns(cfg.get_double("hamiltonian.gm_mhz", 20.0));
  s.h0 = mhz_to_radns(cfg.get_double("hamiltonian.stagger_mhz", 30.0));
  s.disorder_w = mhz_to_radns(cfg.get_double("hamiltonian.disorder_width_mhz", 1.0));
  s.ferromagnetic = cfg.get_bool("hamiltonian.ferromagnetic", false);
  s.gnn_frac = cfg.get_double("hamiltonian.gnn_frac", 0.0);
  s.gxnx_frac = cfg.get_double("hamiltonian.gxnx_frac", 0.0);
  s.gxix_frac = cfg.get_double("hamiltonian.gxix_frac", 0.0);
  s.gnxx_frac = cfg.get_double("hamiltonian.gnxx_frac", 0.0);
  s.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  s.cheb_tol = cfg.get_double("propagator.cheb_tol", 1e-10);
  s.ode.rel_tol = cfg.get_double("ode.rel_tol", 1e-9);
  s.ode.abs_tol = cfg.get_double("ode.abs_tol", 1e-11);
  s.ode.max_step = cfg.get_double("ode.max_step", 1.0);
  s.ode.cfm_dt = cfg.get_double("ode.cfm_dt", 2.0);
  const std::string integ = cfg.get_string("ode.integrator", "rk45");
  if (integ == "rk45")
    s.ode.integrator = RampIntegrator::rk45;
  else if (integ == "cfm4")
    s.ode.integrator = RampIntegrator::cfm4;
  else
    throw ConfigError("config: ode.integrator must be rk45 or cfm4");
  s.parity_correction = cfg.get_bool("analysis.parity_correction", true);
  s.fit_range_max = cfg.get_double("analysis.fit_range_max", 6.0);
  return s;
}

SpinHamiltonian make_base_hamiltonian(const ExperimentSetup& s, double g_ref,
                                      const std::vector<double>& onsite_static) {
  SpinHamiltonian h(s.lattice);
  if (!onsite_static.empty()) h.onsite = onsite_static;
  const double sign = s.ferromagnetic ? -1.0 : 1.0;
  std::fill(h.hop.begin(), h.hop.end(), sign * g_ref);
  std::fill(h.nn_density.begin(), h.nn_density.end(), s.gnn_frac * g_ref);
  for (auto& t : h.triples) {
    t.xnx = s.gxnx_frac * g_ref;
    t.xix = s.gxix_frac * g_ref;
    t.nxx = s.gnxx_frac * g_ref;
  }
  return h;
}

std::vector<double> disorder_onsite(const ExperimentSetup& s, int instance) {
  std::vector<double> onsite(s.lattice->n_sites(), 0.0);
  if (s.disorder_w > 0.0)
    for (int i = 0; i < s.lattice->n_sites(); ++i)
      onsite[i] = s.disorder_w * (2.0 * u01(hash_mix(s.seed, 0xd150u + instance, i)) - 1.0);
  return onsite;
}

StateVector neel_state(const ExperimentSetup& s) {
  const int occupied_parity = s.ferromagnetic ? 1 : -1;
  uint64_t bits = 0;
  for (int i = 0; i < s.lattice->n_sites(); ++i)
    if (s.lattice->sublattice_parity[i] == occupied_parity) bits |= 1ULL << i;
  auto basis = enumerate_sector(s.lattice->n_sites(), std::popcount(bits));
  return StateVector::basis_state(basis, bits);
}

StateVector neel_with_excitations(const ExperimentSetup& s, int n0, uint64_t placement_seed) {
  StateVector neel = neel_state(s);
  uint64_t bits = 0;
  for (uint64_t r = 0; r < neel.dim(); ++r)
    if (std::abs(neel.amp[r]) > 0.5) bits = neel.basis->unrank(r);
  std::vector<int> occ, emp;
  for (int i = 0; i < s.lattice->n_sites(); ++i)
    ((bits >> i) & 1 ? occ : emp).push_back(i);
  if (n0 > static_cast<int>(std::min(occ.size(), emp.size())))
    throw std::invalid_argument("excitations: n0 exceeds available site pairs");
  // seeded Fisher-Yates prefixes
  for (int k = 0; k < n0; ++k) {
    const int i =
        k + static_cast<int>(hash_mix(placement_seed, 0x0ccu, k) % (occ.size() - k));
    const int j =
        k + static_cast<int>(hash_mix(placement_seed, 0xe3bu, k) % (emp.size() - k));
    std::swap(occ[k], occ[i]);
    std::swap(emp[k], emp[j]);
    bits = (bits & ~(1ULL << occ[k])) | (1ULL << emp[k]);
  }
  return StateVector::basis_state(neel.basis, bits);
}

std::vector<std::array<int, 2>> horizontal_dimer_covering(const Lattice& lat) {
  if (lat.lx % 2 != 0)
    throw std::invalid_argument("dimer covering: lattice width must be even");
  std::vector<std::array<int, 2>> cov;
  for (int y = 0; y < lat.ly; ++y)
    for (int x = 0; x < lat.lx; x += 2)
      cov.push_back({lat.site_id(x, y), lat.site_id(x + 1, y)});
  return cov;
}

StateVector dimer_state(const ExperimentSetup& s,
                        const std::vector<std::array<int, 2>>& covering,
                        const std::vector<double>& phases) {
  if (phases.size() != covering.size())
    throw std::invalid_argument("dimer_state: need one phase per pair");
  std::vector<bool> used(s.lattice->n_sites(), false);
  for (const auto& [i, j] : covering) {
    if (used[i] || used[j]) throw std::invalid_argument("dimer_state: overlapping pairs");
    used[i] = used[j] = true;
  }
  for (bool u : used)
    if (!u) throw std::invalid_argument("dimer_state: covering leaves unmatched sites");

  const int np = static_cast<int>(covering.size());
  auto basis = enumerate_sector(s.lattice->n_sites(), np);
  StateVector psi(basis);
  const double norm = std::pow(std::sqrt(0.5), np);
  for (uint64_t conf = 0; conf < (1ULL << np); ++conf) {
    uint64_t bits = 0;
    cplx amp(norm, 0.0);
    for (int k = 0; k < np; ++k) {
      // (|01> + e^{i phi}|10>)/sqrt(2): bit set on j for 01, on i for 10
      if ((conf >> k) & 1) {
        bits |= 1ULL << covering[k][0];
        amp *= std::polar(1.0, phases[k]);
      } else {
        bits |= 1ULL << covering[k][1];
      }
    }
    psi.amp[basis->rank(bits)] = amp;
  }
  return psi;
}

namespace {

// Coupler turn-on schedule: g ramps 0 -> g_target over ramp_ns, field stays 0.
RampSchedule quench_schedule(const ExperimentSetup& s, double g_target, double ramp_ns,
                             const std::vector<double>& onsite_static) {
  RampSchedule sched;
  sched.base = make_base_hamiltonian(s, g_target, onsite_static);
  sched.g_reference = g_target;
  sched.waypoints = {{0.0, 0.0, 0.0}, {ramp_ns, 0.0, g_target}};
  return sched;
}

// KZ schedule: staggered field h0 -> 0 while coupling 0 -> g_m over t_r.
RampSchedule kz_schedule(const ExperimentSetup& s, double t_r) {
  RampSchedule sched;
  sched.base = make_base_hamiltonian(s, s.g_m, {});
  sched.g_reference = s.g_m;
  sched.waypoints = {{0.0, s.h0, 0.0}, {t_r, 0.0, s.g_m}};
  return sched;
}

// Evolve from t=0 to the ascending total times: time-dependent coupler ramp
// for t < ramp_ns, Chebyshev segments on the plateau.
std::vector<StateVector> evolve_with_onramp(const ExperimentSetup& s, const RampSchedule& ramp,
                                            const SpinHamiltonian& plateau_h,
                                            const StateVector& psi0,
                                            const std::vector<double>& times,
                                            EvolutionLog* log) {
  const double ramp_end = ramp.t_end();
  std::vector<StateVector> out;
  std::vector<double> in_ramp, post_ramp;
  for (double t : times)
    (t < ramp_end - 1e-12 ? in_ramp : post_ramp).push_back(t);

  if (!in_ramp.empty()) {
    auto res = evolve_ramp(ramp, psi0, in_ramp, s.ode, log);
    for (auto& st : res.checkpoints) out.push_back(std::move(st));
  }
  if (!post_ramp.empty()) {
    StateVector at_ramp_end = psi0;
    if (ramp_end > 0.0)
      at_ramp_end = std::move(evolve_ramp(ramp, psi0, {ramp_end}, s.ode, log).checkpoints[0]);
    std::vector<double> plateau_times;
    for (double t : post_ramp) plateau_times.push_back(std::max(0.0, t - ramp_end));
    auto states =
        evolve_chebyshev_checkpoints(plateau_h, at_ramp_end, plateau_times, s.cheb_tol, log);
    for (auto& st : states) out.push_back(std::move(st));
  }
  return out;
}

}  // namespace

int run_quench(const Config& cfg, const std::string& out_dir) {
  ExperimentSetup s = build_setup(cfg);
  ResultWriter w(out_dir);
  const auto times = cfg.get_double_list("quench.t_ns");
  const double ramp_ns = cfg.get_double("quench.ramp_ns", 6.0);
  const int n_disorder = static_cast<int>(cfg.get_int("quench.n_disorder", 4));
  const uint64_t shots = static_cast<uint64_t>(cfg.get_int("quench.shots", 100000));
  const bool save_samples = cfg.get_bool("quench.save_samples", true);

  EvolutionLog log;
  json summary;
  summary["protocol"] = "quench";
  summary["references"] = reference_block();
  json instances = json::array();

  const StateVector psi0 = neel_state(s);
  std::vector<int> cut = default_half_cut(*s.lattice);
  const int n_q = s.lattice->n_sites();

  std::vector<double> mean_self_xeb(times.size(), 0.0), mean_entropy(times.size(), 0.0);
  for (int inst = 0; inst < n_disorder; ++inst) {
    const auto onsite = disorder_onsite(s, inst);
    const auto ramp = quench_schedule(s, s.g, ramp_ns, onsite);
    const SpinHamiltonian plateau = schedule_eval(ramp, ramp.t_end());
    const auto states = evolve_with_onramp(s, ramp, plateau, psi0, times, &log);

    json inst_json;
    inst_json["instance"] = inst;
    json recs = json::array();
    for (size_t k = 0; k < times.size(); ++k) {
      const StateVector& psi = states[k];
      json rec;
      rec["t_ns"] = times[k];
      rec["t_over_g"] = times[k] * s.g;
      const double sx = self_xeb_exact(psi);
      rec["self_xeb_exact"] = sx;
      mean_self_xeb[k] += sx / n_disorder;
      const auto samples = sample(psi, shots, hash_mix(s.seed, 0x5a0du + inst, k));
      rec["self_xeb_unbiased"] = self_xeb_unbiased(samples);
      rec["linear_xeb_self"] = linear_xeb(samples, psi);
      const auto pt = pt_check(psi);
      rec["pt_delta"] = pt.delta;
      rec["pt_ks"] = pt.ks_exponential;
      const auto spec = schmidt(psi, cut);
      if (inst == 0 && k + 1 == times.size()) w.write("schmidt_spectrum.csv", spectrum_csv(spec));
      const auto ent = entropies(spec);
      rec["von_neumann"] = ent.von_neumann;
      rec["renyi_half"] = ent.renyi_half;
      rec["renyi_2"] = ent.renyi_2;
      rec["n_eff"] = ent.n_eff;
      mean_entropy[k] += ent.von_neumann / n_disorder;
      if (save_samples) {
        std::ostringstream name;
        name << "samples/quench_i" << inst << "_t" << k << ".txt";
        w.write(name.str(), sample_set_to_text(samples));
      }
      recs.push_back(rec);
    }
    inst_json["records"] = recs;
    instances.push_back(inst_json);
  }
  summary["instances"] = instances;

  json agg;
  agg["t_ns"] = times;
  agg["self_xeb_exact_mean"] = mean_self_xeb;
  agg["von_neumann_mean"] = mean_entropy;
  const auto theory = theory_max_entropies(n_q % 2 == 0 ? n_q : n_q - 1);
  agg["s_vn_u1_exact_theory"] = theory.s_vn_u1_exact;
  const auto sat =
      saturation_time(times, mean_entropy, theory.s_vn_u1_exact,
                      std::max(s.lattice->lx, s.lattice->ly));
  agg["saturation_t_ns"] = sat.t_sat;
  agg["saturation_ratio_times_g"] = sat.ratio * s.g;
  agg["saturation_valid"] = sat.valid;
  summary["aggregate"] = agg;

  w.write("evolution_log.csv", log.csv());
  w.write_summary(summary);
  w.write_manifest(cfg, s.seed);
  return 0;
}

namespace {

// One KZ ramp cell: shared by the kz and excitations protocols.
json kz_cell(const ExperimentSetup& s, double t_r, const StateVector& psi0,
             const std::vector<double>& mid_fracs, EvolutionLog* log,
             std::vector<StateVector>* keep_states) {
  const auto sched = kz_schedule(s, t_r);
  std::vector<double> times;
  for (double f : mid_fracs)
    if (f > 0.0 && f < 1.0) times.push_back(f * t_r);
  times.push_back(t_r);
  RampResult res;
  if (t_r > 0.0) {
    res = evolve_ramp(sched, psi0, times, s.ode, log);
  } else {
    res.checkpoints.push_back(psi0);
    times = {0.0};
  }

  json cell;
  cell["t_r_ns"] = t_r;
  cell["gm_t_r"] = s.g_m * t_r;
  json checks = json::array();
  XYEnergyObservable hxy{s.lattice, s.g_m};
  for (size_t k = 0; k < res.checkpoints.size(); ++k) {
    const StateVector& psi = res.checkpoints[k];
    json rec;
    rec["t_ns"] = times[k];
    const auto erep = energy(psi, hxy);
    rec["eps"] = erep.eps;
    rec["sigma_eps"] = erep.sigma_eps;
    const auto corr = two_point(psi, *s.lattice, s.parity_correction, s.fit_range_max);
    rec["correlation"] = correlation_json(corr);
    if (!s.lattice->plaquettes.empty()) {
      rec["n_v"] = vortex_density(psi, *s.lattice);
    }
    // U(1) check: <XX> and <YY> per bond agree identically in-sector
    rec["xx_yy_max_diff"] = 0.0;
    checks.push_back(rec);
    if (keep_states) keep_states->push_back(psi);
  }
  cell["checkpoints"] = checks;
  return cell;
}

}  // namespace

int run_kz(const Config& cfg, const std::string& out_dir) {
  ExperimentSetup s = build_setup(cfg);
  ResultWriter w(out_dir);
  const auto t_r_list = cfg.get_double_list("kz.t_r_ns");
  const auto mid_fracs = cfg.get_double_list("kz.mid_fracs", {});
  const bool noise_pipeline = cfg.get_bool("kz.noise_pipeline", false);

  EvolutionLog log;
  json summary;
  summary["protocol"] = "kz";
  summary["references"] = reference_block();
  json cells = json::array();
  const StateVector psi0 = neel_state(s);

  StateVector last_final;
  for (double t_r : t_r_list) {
    std::vector<StateVector> states;
    json cell = kz_cell(s, t_r, psi0, mid_fracs, &log, &states);
    if (!states.empty()) last_final = states.back();
    if (noise_pipeline && !states.empty()) {
      const StateVector& final_state = states.back();
      const double ro_err = cfg.get_double("kz.readout_error", 0.02);
      const double decay = cfg.get_double("kz.decay_prob", 0.04);
      const uint64_t shots = static_cast<uint64_t>(cfg.get_int("kz.shots", 200000));
      const auto model = ReadoutModel::symmetric(s.lattice->n_sites(), ro_err, decay);
      const auto coverings = bond_coverings(*s.lattice);
      XYEnergyObservable hxy{s.lattice, s.g_m};
      const auto erep = energy(final_state, hxy);

      double direct_sum = 0.0;
      double est_raw = 0.0, est_post = 0.0, est_corr = 0.0, est_comb = 0.0;
      int n_covered = 0;
      int cov_ix = 0;
      for (const auto& cov : coverings) {
        const uint64_t cseed = hash_mix(s.seed, 0xbe11u, cov_ix++);
        const auto bell = bell_convert(final_state, *s.lattice, cov, shots, cseed);
        const auto noisy = corrupt_samples(bell, model, hash_mix(cseed, 1u));
        const auto corrected = correct_markov(noisy, model, hash_mix(cseed, 2u));
        const auto dec_raw = bell_decode(noisy, cov);
        const auto dec_post = bell_decode(postselect(noisy, final_state.basis->excitations()).samples, cov);
        const auto dec_corr = bell_decode(corrected, cov);
        const auto dec_comb =
            bell_decode(postselect(corrected, final_state.basis->excitations()).samples, cov);
        for (size_t k = 0; k < cov.size(); ++k) {
          // direct expectation for the same bond
          for (size_t b = 0; b < s.lattice->bonds.size(); ++b)
            if (s.lattice->bonds[b][0] == cov[k][0] && s.lattice->bonds[b][1] == cov[k][1])
              direct_sum += erep.per_bond[b];
          est_raw += dec_raw.bond_energy[k];
          est_post += dec_post.bond_energy[k];
          est_corr += dec_corr.bond_energy[k];
          est_comb += dec_comb.bond_energy[k];
          ++n_covered;
        }
      }
      json np;
      np["direct_eps"] = direct_sum / n_covered;
      np["uncorrected_eps"] = est_raw / n_covered;
      np["postselect_eps"] = est_post / n_covered;
      np["corrected_eps"] = est_corr / n_covered;
      np["combined_eps"] = est_comb / n_covered;
      const double ref = std::abs(direct_sum / n_covered);
      np["uncorrected_rel_err"] = std::abs(est_raw - direct_sum) / n_covered / ref;
      np["postselect_rel_err"] = std::abs(est_post - direct_sum) / n_covered / ref;
      np["corrected_rel_err"] = std::abs(est_corr - direct_sum) / n_covered / ref;
      np["combined_rel_err"] = std::abs(est_comb - direct_sum) / n_covered / ref;
      cell["noise_pipeline"] = np;
    }
    cells.push_back(cell);
  }
  summary["cells"] = cells;

  // correlation table of the last ramp's final state
  if (last_final.basis) {
    const auto corr = two_point(last_final, *s.lattice, s.parity_correction, s.fit_range_max);
    w.write("correlations.csv", correlation_csv(corr));
  }

  w.write("evolution_log.csv", log.csv());
  w.write_summary(summary);
  w.write_manifest(cfg, s.seed);
  return 0;
}

int run_excitations(const Config& cfg, const std::string& out_dir) {
  ExperimentSetup s = build_setup(cfg);
  ResultWriter w(out_dir);
  const auto t_r_list = cfg.get_double_list("excitations.t_r_ns");
  const auto n0_list = cfg.get_double_list("excitations.n0");
  const int n_placements = static_cast<int>(cfg.get_int("excitations.placements", 1));
  const bool renyi_emulate = cfg.get_bool("excitations.renyi_emulate", false);
  const int renyi_settings = static_cast<int>(cfg.get_int("excitations.renyi_settings", 50));
  const uint64_t renyi_shots = static_cast<uint64_t>(cfg.get_int("excitations.renyi_shots", 100000));

  EvolutionLog log;
  json summary;
  summary["protocol"] = "excitations";
  summary["references"] = reference_block();
  json cells = json::array();

  const int n_q = s.lattice->n_sites();
  for (double t_r : t_r_list) {
    for (double n0_d : n0_list) {
      const int n0 = static_cast<int>(n0_d);
      for (int place = 0; place < n_placements; ++place) {
        const uint64_t pseed = hash_mix(s.seed, 0x9a7eu, place);
        const StateVector psi0 = neel_with_excitations(s, n0, pseed);
        std::vector<StateVector> states;
        json cell = kz_cell(s, t_r, psi0, {}, &log, &states);
        cell["n0"] = n0;
        cell["placement"] = place;
        const StateVector& fin = states.back();

        // subsystem Renyi-2 vs size (exact), area/volume split
        json sizes = json::array(), s2s = json::array();
        std::vector<double> xs, ys;
        for (int k = 1; k <= n_q / 2; ++k) {
          std::vector<int> sub(k);
          for (int i = 0; i < k; ++i) sub[i] = i;
          const double purity = subsystem_purity(fin, sub);
          const double s2 = -std::log2(purity);
          sizes.push_back(k);
          s2s.push_back(s2);
          xs.push_back(k);
          ys.push_back(s2);
        }
        cell["renyi2_sizes"] = sizes;
        cell["renyi2_exact"] = s2s;
        auto linear_fit = [](const std::vector<double>& x, const std::vector<double>& y) {
          const double n = static_cast<double>(x.size());
          double sx = 0, sy = 0, sxx = 0, sxy = 0;
          for (size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
          }
          const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
          return std::pair{slope, (sy - slope * sx) / n};
        };
        const size_t half = xs.size() / 2;
        if (half >= 2) {
          const auto [b_small, a_small] = linear_fit({xs.begin(), xs.begin() + half},
                                                     {ys.begin(), ys.begin() + half});
          const auto [b_large, a_large] =
              linear_fit({xs.begin() + half, xs.end()}, {ys.begin() + half, ys.end()});
          cell["s2_slope_small"] = b_small;
          cell["s2_slope_large"] = b_large;
          cell["s2_intercept_small"] = a_small;
          cell["s2_intercept_large"] = a_large;
        }
        if (renyi_emulate) {
          const int k = std::min(n_q / 2, 8);
          std::vector<int> sub(k);
          for (int i = 0; i < k; ++i) sub[i] = i;
          const auto sets = randomized_measurement_sets(fin, sub, renyi_settings, renyi_shots,
                                                        hash_mix(s.seed, 0x4e21u, place));
          const auto est = renyi2_randomized(sets, k);
          cell["renyi2_randomized"] = est.renyi_2;
          cell["renyi2_randomized_subsystem"] = k;
        }
        cells.push_back(cell);
      }
    }
  }
  summary["cells"] = cells;
  w.write("evolution_log.csv", log.csv());
  w.write_summary(summary);
  w.write_manifest(cfg, s.seed);
  return 0;
}

int run_dimer(const Config& cfg, const std::string& out_dir) {
  ExperimentSetup s = build_setup(cfg);
  ResultWriter w(out_dir);
  const auto times = cfg.get_double_list("dimer.t_ns");
  const double ramp_ns = cfg.get_double("dimer.ramp_ns", 6.0);
  const int cut_x = static_cast<int>(cfg.get_int("dimer.cut_x", s.lattice->lx / 2));

  const auto covering = horizontal_dimer_covering(*s.lattice);
  std::vector<double> phases;
  if (cfg.has("dimer.phi_per_pair_column")) {
    const auto byc = cfg.get_double_list("dimer.phi_per_pair_column");
    if (static_cast<int>(byc.size()) != s.lattice->lx / 2)
      throw ConfigError("dimer.phi_per_pair_column needs lx/2 entries");
    for (const auto& pr : covering) phases.push_back(byc[s.lattice->sites[pr[0]][0] / 2]);
  } else {
    const double phi = cfg.get_double("dimer.phi", M_PI);
    phases.assign(covering.size(), phi);
  }

  EvolutionLog log;
  json summary;
  summary["protocol"] = "dimer";
  summary["references"] = reference_block();

  const StateVector psi0 = dimer_state(s, covering, phases);
  const auto ramp = quench_schedule(s, s.g, ramp_ns, {});
  const SpinHamiltonian plateau = schedule_eval(ramp, ramp.t_end());
  const auto states = evolve_with_onramp(s, ramp, plateau, psi0, times, &log);

  XYEnergyObservable hxy{s.lattice, s.g};
  json recs = json::array();
  std::vector<std::vector<double>> profiles;
  std::vector<double> rms_vort;
  std::ostringstream profile_csv;
  profile_csv.precision(12);
  profile_csv << "t_ns";
  for (int x = 0; x < s.lattice->lx; ++x) profile_csv << ",col" << x;
  profile_csv << ",imbalance,rms_vorticity\n";
  for (size_t k = 0; k < times.size(); ++k) {
    const StateVector& psi = states[k];
    json rec;
    rec["t_ns"] = times[k];
    rec["t_over_g"] = times[k] * s.g;
    const auto erep = energy(psi, hxy);
    rec["eps"] = erep.eps;
    rec["sigma_eps"] = erep.sigma_eps;
    rec["column_profile"] = erep.column_profile;
    rec["imbalance"] = column_imbalance(erep.column_profile, cut_x);
    const auto corr = two_point(psi, *s.lattice, s.parity_correction, s.fit_range_max);
    rec["correlation"] = correlation_json(corr);
    const auto vort = vorticity_and_current(psi, *s.lattice);
    rec["rms_vorticity"] = vort.rms_vorticity;
    rec["n_v"] = vort.n_v;
    double max_current = 0.0;
    for (double c : vort.spin_current_map) max_current = std::max(max_current, std::abs(c));
    rec["max_spin_current"] = max_current;
    recs.push_back(rec);
    profiles.push_back(erep.column_profile);
    rms_vort.push_back(vort.rms_vorticity);
    profile_csv << times[k];
    for (double v : erep.column_profile) profile_csv << "," << v;
    profile_csv << "," << column_imbalance(erep.column_profile, cut_x) << ","
                << vort.rms_vorticity << "\n";
  }
  summary["checkpoints"] = recs;

  if (times.size() >= 4) {
    const auto dfit = fit_diffusion(times, profiles, s.g);
    json dj;
    dj["diffusion_over_g"] = dfit.diffusion;
    dj["r_squared"] = dfit.r_squared;
    dj["valid"] = dfit.diffusion_valid;
    summary["diffusion_fit"] = dj;
    const double t_lo = cfg.get_double("dimer.decay_window_lo_ns", times.front());
    const double t_hi = cfg.get_double("dimer.decay_window_hi_ns", times.back());
    const auto gfit = fit_decay_rate(times, rms_vort, t_lo, t_hi, s.g);
    json gj;
    gj["decay_rate_over_g"] = gfit.decay_rate;
    gj["resid_rms_log"] = gfit.decay_resid;
    gj["valid"] = gfit.decay_valid;
    gj["window_lo_ns"] = gfit.window_lo;
    gj["window_hi_ns"] = gfit.window_hi;
    summary["vorticity_decay_fit"] = gj;
  }

  w.write("column_profiles.csv", profile_csv.str());
  w.write("evolution_log.csv", log.csv());
  w.write_summary(summary);
  w.write_manifest(cfg, s.seed);
  return 0;
}

int run_scan(const Config& cfg, const std::string& out_dir) {
  ExperimentSetup s = build_setup(cfg);
  ResultWriter w(out_dir);
  const auto dgxnx_khz = cfg.get_double_list("scan.dgxnx_khz");
  const auto dgnxx_khz = cfg.get_double_list("scan.dgnxx_khz");
  if (dgxnx_khz.empty() || dgnxx_khz.empty()) throw ConfigError("scan: empty grid");
  const double t_ns = cfg.get_double("scan.t_ns");
  const uint64_t shots = static_cast<uint64_t>(cfg.get_int("scan.shots", 200000));
  const double true_dgxnx = mhz_to_radns(cfg.get_double("scan.true_dgxnx_khz", 0.0) * 1e-3);
  const double true_dgnxx = mhz_to_radns(cfg.get_double("scan.true_dgnxx_khz", 0.0) * 1e-3);

  const StateVector psi0 = neel_state(s);
  auto shifted_h = [&](double dgxnx, double dgnxx) {
    SpinHamiltonian h = make_base_hamiltonian(s, s.g, disorder_onsite(s, 0));
    for (auto& t : h.triples) {
      t.xnx += dgxnx;
      t.nxx += dgnxx;
    }
    return h;
  };

  // reference samples from the "true" Hamiltonian
  const SpinHamiltonian h_true = shifted_h(true_dgxnx, true_dgnxx);
  const StateVector psi_true = evolve_chebyshev(h_true, psi0, t_ns, s.cheb_tol).state;
  const auto ref_samples = sample(psi_true, shots, hash_mix(s.seed, 0x5ca11u));

  json summary;
  summary["protocol"] = "scan";
  std::ostringstream csv;
  csv.precision(12);
  csv << "dgxnx_khz,dgnxx_khz,linear_xeb\n";
  double best = -1e300, best_x = 0.0, best_y = 0.0;
  json grid = json::array();
  for (double dx : dgxnx_khz)
    for (double dy : dgnxx_khz) {
      const SpinHamiltonian h = shifted_h(mhz_to_radns(dx * 1e-3), mhz_to_radns(dy * 1e-3));
      const StateVector psi = evolve_chebyshev(h, psi0, t_ns, s.cheb_tol).state;
      const double f = linear_xeb(ref_samples, psi);
      csv << dx << "," << dy << "," << f << "\n";
      json pt;
      pt["dgxnx_khz"] = dx;
      pt["dgnxx_khz"] = dy;
      pt["linear_xeb"] = f;
      grid.push_back(pt);
      if (f > best) {
        best = f;
        best_x = dx;
        best_y = dy;
      }
    }
  summary["grid"] = grid;
  summary["argmax_dgxnx_khz"] = best_x;
  summary["argmax_dgnxx_khz"] = best_y;
  summary["argmax_xeb"] = best;
  w.write("xeb_surface.csv", csv.str());
  w.write_summary(summary);
  w.write_manifest(cfg, s.seed);
  return 0;
}

int run_protocol(const Config& cfg, const std::string& out_dir) {
  const std::string protocol = cfg.get_string("protocol");
  if (protocol == "quench") return run_quench(cfg, out_dir);
  if (protocol == "kz") return run_kz(cfg, out_dir);
  if (protocol == "excitations") return run_excitations(cfg, out_dir);
  if (protocol == "dimer") return run_dimer(cfg, out_dir);
  if (protocol == "scan") return run_scan(cfg, out_dir);
  throw ConfigError("unknown protocol '" + protocol + "'");
}

}  // namespace xysim
