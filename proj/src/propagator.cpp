#include "xysim/propagator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "xysim/parallel.hpp"

namespace xysim {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void vec_scale_copy(const std::vector<cplx>& src, std::vector<cplx>& dst, cplx a) {
  const cplx* s = src.data();
  cplx* d = dst.data();
  parallel_for_chunked(static_cast<int64_t>(src.size()), [&](int64_t lo, int64_t hi, int) {
    for (int64_t i = lo; i < hi; ++i) d[i] = a * s[i];
  });
}

void vec_phase(std::vector<cplx>& v, cplx phase) {
  cplx* d = v.data();
  parallel_for_chunked(static_cast<int64_t>(v.size()), [&](int64_t lo, int64_t hi, int) {
    for (int64_t i = lo; i < hi; ++i) d[i] *= phase;
  });
}

double vec_norm(const std::vector<cplx>& v) {
  const cplx* d = v.data();
  const double n2 = parallel_reduce_sum(static_cast<int64_t>(v.size()),
                                        [d](int64_t lo, int64_t hi) {
                                          double s = 0.0;
                                          for (int64_t i = lo; i < hi; ++i) s += std::norm(d[i]);
                                          return s;
                                        });
  return std::sqrt(n2);
}

// Decay exponent of J_m(tau) in the super-exponential regime m > tau.
double bessel_decay_exponent(double m, double tau) {
  if (m <= tau || tau <= 0.0) return 0.0;
  const double x = m / tau;
  return m * std::log(x + std::sqrt(x * x - 1.0)) - std::sqrt(m * m - tau * tau);
}

}  // namespace

std::vector<double> bessel_j_array(double tau, int m_max) {
  std::vector<double> j(m_max + 1, 0.0);
  if (tau == 0.0) {
    j[0] = 1.0;
    return j;
  }
  // Orders whose magnitude underflows double range contribute nothing.
  int hard_cut = m_max;
  while (hard_cut > tau + 1 && bessel_decay_exponent(hard_cut - 1, tau) > 650.0) --hard_cut;
  const int start =
      std::min(m_max, hard_cut) + 20 + static_cast<int>(std::sqrt(40.0 * (hard_cut + 1)));
  std::vector<double> work(start + 2, 0.0);
  work[start + 1] = 0.0;
  work[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    work[k - 1] = (2.0 * k / tau) * work[k] - work[k + 1];
    if (std::abs(work[k - 1]) > 1e250) {
      for (int i = k - 1; i <= start + 1; ++i) work[i] *= 1e-250;
    }
  }
  double norm = work[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * work[k];
  for (int k = 0; k <= m_max; ++k) j[k] = (k <= start ? work[k] / norm : 0.0);
  return j;
}

ChebyshevPlan build_chebyshev_plan(const SpinHamiltonian& h, int m_excitations, double t,
                                   double tol, int cap_override) {
  if (t < 0.0) throw std::invalid_argument("build_chebyshev_plan: negative time");
  if (tol < 1e-12) throw std::invalid_argument("build_chebyshev_plan: tol below 1e-12");
  ChebyshevPlan plan;
  const auto bounds = bandwidth_bound(h, m_excitations);
  plan.e_min = bounds[0];
  plan.e_max = bounds[1];
  plan.t = t;
  plan.tol = tol;
  plan.tau = t * (plan.e_max - plan.e_min);
  plan.m_star = 0.5 * std::exp(1.0) * plan.tau;
  plan.coeff_cap = cap_override > 0 ? cap_override : static_cast<int>(4.0 * plan.m_star + 100.0);
  plan.bessel = bessel_j_array(plan.tau, plan.coeff_cap);
  const double cut = tol * 1e-2;
  int m = static_cast<int>(plan.m_star) + 1;
  while (m <= plan.coeff_cap && std::abs(plan.bessel[m]) >= cut) ++m;
  if (m > plan.coeff_cap)
    throw NumericalError("chebyshev: coefficients above " + std::to_string(cut) +
                         " past cap " + std::to_string(plan.coeff_cap) + " at tau=" +
                         std::to_string(plan.tau));
  plan.m_trunc = (plan.tau == 0.0) ? 0 : m;
  return plan;
}

int64_t matvec_budget(const ChebyshevPlan& plan) {
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(plan.m_star)));
}

namespace {

// Shared Chebyshev recurrence; psi is replaced by exp(-i H_eff t) psi where
// H_eff is the matvec evaluated at knobs (coupling_scale, field).
int64_t chebyshev_core(SectorMatvec& mv, double cs, double hp, const ChebyshevPlan& plan,
                       StateVector& psi) {
  if (plan.t == 0.0) return 0;
  const double w = plan.e_max - plan.e_min;
  const double c = 0.5 * (plan.e_max + plan.e_min);
  const double norm_in = vec_norm(psi.amp);
  const cplx drift_phase = std::polar(1.0, -c * plan.t);
  if (plan.tau == 0.0 || plan.m_trunc == 0) {
    // Bound collapse: H acts as c * identity within tolerance.
    vec_phase(psi.amp, drift_phase);
    return 0;
  }
  mv.set_diag_shift(-c);
  const int64_t n = psi.amp.size();
  std::vector<cplx> prev = psi.amp;  // T_0 parton
  std::vector<cplx> cur(n), acc(n);
  const auto& j = plan.bessel;
  vec_scale_copy(prev, acc, cplx(j[0], 0.0));
  mv.apply_fused(prev.data(), cur.data(), cplx(0.0, -1.0 / w), nullptr, acc.data(),
                 cplx(2.0 * j[1], 0.0), cs, hp);
  int64_t matvecs = 1;
  for (int m = 2; m <= plan.m_trunc; ++m) {
    // prev becomes the new parton in place: phi_m = -2i h phi_{m-1} + phi_{m-2}
    mv.apply_fused(cur.data(), prev.data(), cplx(0.0, -2.0 / w), prev.data(), acc.data(),
                   cplx(2.0 * j[m], 0.0), cs, hp);
    std::swap(prev, cur);
    ++matvecs;
  }
  mv.set_diag_shift(0.0);
  psi.amp = std::move(acc);
  vec_phase(psi.amp, drift_phase);
  const double norm_out = vec_norm(psi.amp);
  if (norm_in == 0.0 || std::abs(norm_out / norm_in - 1.0) >= plan.tol)
    throw NumericalError("chebyshev: norm drift " +
                         std::to_string(std::abs(norm_out / norm_in - 1.0)) + " exceeds tol " +
                         std::to_string(plan.tol) + " (tau=" + std::to_string(plan.tau) +
                         ", cap=" + std::to_string(plan.coeff_cap) + ")");
  return matvecs;
}

}  // namespace

ChebyshevResult evolve_chebyshev(const SpinHamiltonian& h, const StateVector& psi, double t,
                                 double tol, EvolutionLog* log, int cap_override) {
  if (!psi.basis) throw std::invalid_argument("evolve_chebyshev: state has no basis");
  SectorMatvec mv(h, psi.basis);
  ChebyshevResult res;
  res.plan = build_chebyshev_plan(h, psi.basis->excitations(), t, tol, cap_override);
  res.state = psi;
  const double t0 = now_ms();
  res.matvecs = chebyshev_core(mv, 1.0, 0.0, res.plan, res.state);
  if (log)
    log->add({"chebyshev", 0.0, t, res.plan.tau, res.matvecs, now_ms() - t0, psi.basis->dim()});
  return res;
}

std::vector<StateVector> evolve_chebyshev_checkpoints(const SpinHamiltonian& h,
                                                      const StateVector& psi0,
                                                      const std::vector<double>& times,
                                                      double tol, EvolutionLog* log) {
  if (!psi0.basis) throw std::invalid_argument("evolve_chebyshev_checkpoints: no basis");
  SectorMatvec mv(h, psi0.basis);
  std::vector<StateVector> out;
  out.reserve(times.size());
  StateVector cur = psi0;
  double t_prev = 0.0;
  for (double t : times) {
    if (t < t_prev)
      throw std::invalid_argument("evolve_chebyshev_checkpoints: times must be ascending");
    const double dt = t - t_prev;
    if (dt > 0.0) {
      auto plan = build_chebyshev_plan(h, psi0.basis->excitations(), dt, tol);
      const double t0 = now_ms();
      const int64_t mvs = chebyshev_core(mv, 1.0, 0.0, plan, cur);
      if (log)
        log->add({"chebyshev", t_prev, t, plan.tau, mvs, now_ms() - t0, psi0.basis->dim()});
    }
    t_prev = t;
    out.push_back(cur);
  }
  return out;
}

int64_t EvolutionLog::total_matvecs() const {
  int64_t n = 0;
  for (const auto& e : entries_) n += e.matvecs;
  return n;
}

std::string EvolutionLog::csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "kind,t_from_ns,t_to_ns,tau,matvecs,wall_ms,dim\n";
  for (const auto& e : entries_)
    os << e.kind << "," << e.t_from << "," << e.t_to << "," << e.tau << "," << e.matvecs << ","
       << e.wall_ms << "," << e.dim << "\n";
  return os.str();
}

namespace {

// Knob values (field, coupling_scale) of the schedule at time t.
std::array<double, 2> ramp_knobs(const RampSchedule& s, double t) {
  const auto hg = s.knobs_at(t);
  return {hg[0], hg[1] / s.g_reference};
}

// Coefficient-table instance used only for spectral bounds.
SpinHamiltonian ramp_instance(const RampSchedule& s, double h, double g) {
  SpinHamiltonian out = s.base;
  const double scale = g / s.g_reference;
  for (size_t i = 0; i < out.onsite.size(); ++i)
    out.onsite[i] += h * s.base.lattice->sublattice_parity[i];
  for (auto& v : out.hop) v *= scale;
  for (auto& v : out.nn_density) v *= scale;
  for (auto& t3 : out.triples) {
    t3.xnx *= scale;
    t3.xix *= scale;
    t3.nxx *= scale;
  }
  return out;
}

struct Rkf45 {
  // Fehlberg 4(5) tableau
  static constexpr double c2 = 0.25, c3 = 0.375, c4 = 12.0 / 13.0, c5 = 1.0, c6 = 0.5;
  static constexpr double a21 = 0.25;
  static constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
  static constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
  static constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                          a54 = -845.0 / 4104.0;
  static constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                          a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
  static constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0, b4 = 28561.0 / 56430.0,
                          b5 = -9.0 / 50.0, b6 = 2.0 / 55.0;
  static constexpr double d1 = 25.0 / 216.0, d3 = 1408.0 / 2565.0, d4 = 2197.0 / 4104.0,
                          d5 = -1.0 / 5.0;
};

void axpy_combine(std::vector<cplx>& out, const std::vector<cplx>& y,
                  std::initializer_list<std::pair<const std::vector<cplx>*, double>> terms,
                  double h) {
  const int64_t n = y.size();
  parallel_for_chunked(n, [&](int64_t lo, int64_t hi, int) {
    for (int64_t i = lo; i < hi; ++i) {
      cplx v = y[i];
      for (const auto& [vec, coeff] : terms) v += h * coeff * (*vec)[i];
      out[i] = v;
    }
  });
}

int64_t rk45_segment(const RampSchedule& s, SectorMatvec& mv, StateVector& psi, double t0,
                     double t1, const OdeControl& ctrl, int64_t* steps_out) {
  const int64_t n = psi.amp.size();
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), ytmp(n), y5(n), err(n);
  int64_t matvecs = 0, steps = 0;
  double t = t0;
  double h = std::min({ctrl.max_step, t1 - t0});
  double err_prev = 1.0;
  const cplx mi(0.0, -1.0);

  auto deriv = [&](double tt, const std::vector<cplx>& y, std::vector<cplx>& k) {
    const auto [hp, cs] = ramp_knobs(s, tt);
    mv.apply_fused(y.data(), k.data(), mi, nullptr, nullptr, cplx(0.0, 0.0), cs, hp);
    ++matvecs;
  };

  while (t < t1 - 1e-13 * std::max(1.0, std::abs(t1))) {
    h = std::min(h, t1 - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t1)))
      throw NumericalError("rk45: step size underflow at t=" + std::to_string(t) + " ns");
    deriv(t, psi.amp, k1);
    axpy_combine(ytmp, psi.amp, {{&k1, Rkf45::a21}}, h);
    deriv(t + Rkf45::c2 * h, ytmp, k2);
    axpy_combine(ytmp, psi.amp, {{&k1, Rkf45::a31}, {&k2, Rkf45::a32}}, h);
    deriv(t + Rkf45::c3 * h, ytmp, k3);
    axpy_combine(ytmp, psi.amp, {{&k1, Rkf45::a41}, {&k2, Rkf45::a42}, {&k3, Rkf45::a43}}, h);
    deriv(t + Rkf45::c4 * h, ytmp, k4);
    axpy_combine(ytmp, psi.amp,
                 {{&k1, Rkf45::a51}, {&k2, Rkf45::a52}, {&k3, Rkf45::a53}, {&k4, Rkf45::a54}}, h);
    deriv(t + Rkf45::c5 * h, ytmp, k5);
    axpy_combine(ytmp, psi.amp,
                 {{&k1, Rkf45::a61},
                  {&k2, Rkf45::a62},
                  {&k3, Rkf45::a63},
                  {&k4, Rkf45::a64},
                  {&k5, Rkf45::a65}},
                 h);
    deriv(t + Rkf45::c6 * h, ytmp, k6);
    axpy_combine(y5, psi.amp,
                 {{&k1, Rkf45::b1}, {&k3, Rkf45::b3}, {&k4, Rkf45::b4}, {&k5, Rkf45::b5},
                  {&k6, Rkf45::b6}},
                 h);
    // scaled RMS of (5th - 4th order) difference
    std::vector<double> partial(chunk_count(n), 0.0);
    const cplx* y5p = y5.data();
    const cplx* yp = psi.amp.data();
    const cplx *k1p = k1.data(), *k3p = k3.data(), *k4p = k4.data(), *k5p = k5.data(),
               *k6p = k6.data();
    const double atol = ctrl.abs_tol, rtol = ctrl.rel_tol;
    parallel_for_chunked(n, [&](int64_t lo, int64_t hi, int chunk) {
      double acc = 0.0;
      for (int64_t i = lo; i < hi; ++i) {
        const cplx e = h * ((Rkf45::b1 - Rkf45::d1) * k1p[i] + (Rkf45::b3 - Rkf45::d3) * k3p[i] +
                            (Rkf45::b4 - Rkf45::d4) * k4p[i] + (Rkf45::b5 - Rkf45::d5) * k5p[i] +
                            Rkf45::b6 * k6p[i]);
        const double sc = atol + rtol * std::max(std::abs(yp[i]), std::abs(y5p[i]));
        const double r = std::abs(e) / sc;
        acc += r * r;
      }
      partial[chunk] = acc;
    });
    double err2 = 0.0;
    for (double v : partial) err2 += v;
    const double errn = std::sqrt(err2 / static_cast<double>(n));
    if (errn <= 1.0) {
      std::swap(psi.amp, y5);
      t += h;
      ++steps;
      const double fac =
          std::clamp(0.9 * std::pow(std::max(errn, 1e-10), -0.14) * std::pow(err_prev, 0.08),
                     0.2, 5.0);
      err_prev = std::max(errn, 1e-10);
      h = std::min(h * fac, ctrl.max_step);
    } else {
      h *= std::clamp(0.9 * std::pow(errn, -0.2), 0.1, 0.9);
    }
  }
  if (steps_out) *steps_out += steps;
  return matvecs;
}

// Fourth-order commutator-free Magnus step: two Chebyshev exponentials of
// Gauss-node combinations of the ramp family. Each exponential is unitary to
// the Chebyshev tolerance, so norm drift stays at the stopping-rule scale
// regardless of the step size.
int64_t cfm4_segment(const RampSchedule& s, SectorMatvec& mv, StateVector& psi, double t0,
                     double t1, const OdeControl& ctrl, int64_t* steps_out) {
  const double root3 = std::sqrt(3.0);
  const double alpha1 = 0.25 - root3 / 6.0, alpha2 = 0.25 + root3 / 6.0;
  const double span = t1 - t0;
  const int n_steps = std::max<int>(1, static_cast<int>(std::ceil(span / ctrl.cfm_dt)));
  const double dt = span / n_steps;
  const double inner_tol = std::min(1e-11, ctrl.rel_tol);
  const int m_exc = psi.basis->excitations();
  int64_t matvecs = 0;
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * dt;
    const auto [ha, ga] = s.knobs_at(t + dt * (0.5 - root3 / 6.0));
    const auto [hb, gb] = s.knobs_at(t + dt * (0.5 + root3 / 6.0));
    // exp(-i dt (x2 Ha + x1 Hb)) then exp(-i dt (x1 Ha + x2 Hb)), each
    // rewritten as a half-step of the doubled combination.
    const std::array<std::array<double, 2>, 2> combos = {
        {{2.0 * (alpha2 * ha + alpha1 * hb), 2.0 * (alpha2 * ga + alpha1 * gb)},
         {2.0 * (alpha1 * ha + alpha2 * hb), 2.0 * (alpha1 * ga + alpha2 * gb)}}};
    for (const auto& [hm, gm] : combos) {
      const SpinHamiltonian inst = ramp_instance(s, hm, gm);
      auto plan = build_chebyshev_plan(inst, m_exc, 0.5 * dt, inner_tol);
      matvecs += chebyshev_core(mv, gm / s.g_reference, hm, plan, psi);
    }
    if (steps_out) ++(*steps_out);
  }
  return matvecs;
}

}  // namespace

RampResult evolve_ramp(const RampSchedule& s, const StateVector& psi0,
                       const std::vector<double>& checkpoint_times, const OdeControl& ctrl,
                       EvolutionLog* log) {
  if (!psi0.basis) throw std::invalid_argument("evolve_ramp: state has no basis");
  if (ctrl.rel_tol <= 0.0 || ctrl.abs_tol <= 0.0 || ctrl.max_step <= 0.0)
    throw std::invalid_argument("evolve_ramp: tolerances and max step must be positive");
  std::vector<double> times = checkpoint_times;
  if (times.empty()) times.push_back(s.t_end());
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < s.t_start() - 1e-12 || times[i] > s.t_end() + 1e-9)
      throw std::invalid_argument("evolve_ramp: checkpoint outside schedule domain");
    if (i > 0 && times[i] < times[i - 1])
      throw std::invalid_argument("evolve_ramp: checkpoints must be ascending");
  }

  std::vector<double> pattern(s.base.lattice->n_sites());
  for (int i = 0; i < s.base.lattice->n_sites(); ++i)
    pattern[i] = static_cast<double>(s.base.lattice->sublattice_parity[i]);
  SectorMatvec mv(s.base, pattern, psi0.basis);

  RampResult res;
  StateVector cur = psi0;
  double t_prev = s.t_start();
  for (double t : times) {
    const double t0 = now_ms();
    int64_t mvs = 0;
    if (t > t_prev) {
      if (ctrl.integrator == RampIntegrator::rk45)
        mvs = rk45_segment(s, mv, cur, t_prev, t, ctrl, &res.steps);
      else
        mvs = cfm4_segment(s, mv, cur, t_prev, t, ctrl, &res.steps);
      const double drift = std::abs(vec_norm(cur.amp) - 1.0);
      if (drift >= ctrl.norm_drift_limit)
        throw NumericalError("evolve_ramp: norm drift " + std::to_string(drift) +
                             " above limit at t=" + std::to_string(t) + " ns");
      cur.normalize();
    }
    res.matvecs += mvs;
    if (log)
      log->add({ctrl.integrator == RampIntegrator::rk45 ? "rk45" : "cfm4", t_prev, t, 0.0, mvs,
                now_ms() - t0, psi0.basis->dim()});
    t_prev = t;
    res.checkpoints.push_back(cur);
  }
  return res;
}

}  // namespace xysim
