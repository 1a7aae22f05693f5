#pragma once

// Time-domain open-system simulation of the gate: drive ramp, coherent
// photon-qubit pulse input through the port, Lindblad evolution with atom
// decoherence, and input-output extraction of the reflected amplitude.
//
// State space: atom {g, e} x resonator photon number {0, 1, 2}; the n = 2
// level exists so two-photon leakage is measurable rather than structurally
// impossible. Basis index is 2 n + (atom == e).
//
// Frames: the atom rotates at the drive frequency omega_d, the resonator at
// the input waveform's frame. All Hamiltonian terms are then slow; the input
// enters as H_in = i sqrt(kappa) (alpha(t) a' - alpha*(t) a) and the output
// leaves through xi(t) = alpha(t) - sqrt(kappa) <a(t)>.

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sprintsim/model.hpp"
#include "sprintsim/qmath.hpp"
#include "sprintsim/signal.hpp"

namespace sprintsim {

using rho6 = Eigen::Matrix<cd, 6, 6>;

struct noise_params {
  double t1 = std::numeric_limits<double>::infinity();     // ns
  double t_phi = std::numeric_limits<double>::infinity();  // ns
  // Readout assignment fidelities: P(assign g | g) and P(assign e | e).
  // The implied 2x2 assignment matrix is column-stochastic by construction.
  double read_fid_g = 1.0;
  double read_fid_e = 1.0;
};

inline void validate_noise(const noise_params& n) {
  if (!(n.t1 > 0.0) || !(n.t_phi > 0.0))
    throw std::invalid_argument("noise_params: coherence times must be positive");
  if (n.read_fid_g < 0.0 || n.read_fid_g > 1.0 || n.read_fid_e < 0.0 || n.read_fid_e > 1.0)
    throw std::invalid_argument("noise_params: readout fidelities must lie in [0, 1]");
}

inline noise_params noise_from(const system_params& p) {
  noise_params n;
  n.t1 = p.t1_atom;
  n.t_phi = p.t_phi;
  return n;
}

// Drive envelope: a flat top between the 50% crossings on50/off50 with
// Gaussian-smoothed edges. rabi(t) is the instantaneous Rabi amplitude.
struct drive_schedule {
  double omega_d = 0.0;
  double rabi_peak = 0.0;
  double on50 = 0.0;
  double off50 = 0.0;
  double edge_fwhm = 40.0;

  double rabi(double t) const {
    return rabi_peak * flat_top_amplitude(t, on50, off50, edge_fwhm);
  }
};

// Integrator-facing input: a closure for the baseband amplitude (evaluated
// analytically at the Runge-Kutta midpoints) plus its reference frame.
struct input_field {
  std::function<cd(double)> amp;
  double frame = 0.0;  // rad/ns
};

struct sim_settings {
  double dt = 0.125;    // ns
  double t_end = 0.0;   // ns; integration runs over [0, t_end]
  int rho_stride = 16;  // full density-matrix snapshot every this many steps
};

struct trajectory {
  double dt = 0.0;
  std::vector<cd> a_expect;            // <a>(t_k), k = 0..n_steps
  std::vector<bloch_vector> atom_bloch;
  std::vector<double> atom_ex;         // excited-state population of the reduced atom
  int rho_stride = 1;
  std::vector<rho6> rho_samples;       // every rho_stride steps, plus the final state
  rho6 rho_final = rho6::Zero();
  double trace_drift_max = 0.0;
  double herm_asym_max = 0.0;
  double n2_max = 0.0;  // peak population of the n = 2 resonator level

  time_grid grid() const { return {0.0, dt, static_cast<int>(a_expect.size())}; }
};

namespace detail {

struct lindblad_ctx {
  double delta_ge = 0.0;  // omega_ge - omega_d
  double delta_f = 0.0;   // omega_r - input frame
  double two_chi = 0.0;
  double kappa = 0.0;
  double sqrt_kappa = 0.0;
  double g1 = 0.0;    // 1 / t1
  double gphi = 0.0;  // 1 / t_phi
};

inline rho6 hamiltonian(const lindblad_ctx& c, double rabi, cd alpha) {
  rho6 h = rho6::Zero();
  for (int n = 0; n < 3; ++n) {
    h(2 * n, 2 * n) = n * c.delta_f;
    h(2 * n + 1, 2 * n + 1) = c.delta_ge + n * (c.delta_f - c.two_chi);
    h(2 * n, 2 * n + 1) = 0.5 * rabi;
    h(2 * n + 1, 2 * n) = 0.5 * rabi;
  }
  const cd i(0.0, 1.0);
  for (int n = 0; n < 2; ++n) {
    const double root = std::sqrt(n + 1.0);
    for (int s = 0; s < 2; ++s) {
      const int lo = 2 * n + s, hi = 2 * (n + 1) + s;
      h(hi, lo) += i * c.sqrt_kappa * alpha * root;
      h(lo, hi) += -i * c.sqrt_kappa * std::conj(alpha) * root;
    }
  }
  return h;
}

// drho/dt = -i [H, rho] + kappa D[a] + g1 D[s-] + (gphi / 2) D[sz].
inline rho6 lindblad_rhs(const lindblad_ctx& c, double rabi, cd alpha, const rho6& rho) {
  const rho6 h = hamiltonian(c, rabi, alpha);
  rho6 out = cd(0.0, -1.0) * (h * rho - rho * h);
  for (int i = 0; i < 6; ++i) {
    const int ni = i >> 1, si = i & 1;
    for (int j = 0; j < 6; ++j) {
      const int nj = j >> 1, sj = j & 1;
      cd d(0.0, 0.0);
      if (ni <= 1 && nj <= 1)
        d += c.kappa * std::sqrt((ni + 1.0) * (nj + 1.0)) * rho(i + 2, j + 2);
      d -= 0.5 * c.kappa * (ni + nj) * rho(i, j);
      if (c.g1 > 0.0) {
        if (si == 0 && sj == 0) d += c.g1 * rho(i + 1, j + 1);
        d -= 0.5 * c.g1 * (si + sj) * rho(i, j);
      }
      if (c.gphi > 0.0 && si != sj) d -= c.gphi * rho(i, j);
      out(i, j) += d;
    }
  }
  return out;
}

inline double max_hamiltonian_scale(const lindblad_ctx& c, double rabi_peak) {
  double m = std::max({std::abs(c.delta_ge), rabi_peak, c.kappa});
  for (int n = 0; n < 3; ++n) {
    m = std::max(m, std::abs(n * c.delta_f));
    m = std::max(m, std::abs(c.delta_ge + n * (c.delta_f - c.two_chi)));
  }
  return m;
}

}  // namespace detail

inline trajectory evolve(const system_params& p, const drive_schedule& sched,
                         const input_field& in, const pure_qubit_state& atom_init,
                         const noise_params& noise, const sim_settings& settings) {
  validate_system(p);
  validate_noise(noise);
  if (atom_init.basis != qubit_basis::atom)
    throw std::invalid_argument("evolve: initial state must be an atom state");
  if (!(settings.dt > 0.0) || !(settings.t_end > settings.dt))
    throw std::invalid_argument("evolve: bad time grid");
  if (settings.rho_stride < 1) throw std::invalid_argument("evolve: rho_stride must be >= 1");

  detail::lindblad_ctx c;
  c.delta_ge = p.omega_ge - sched.omega_d;
  c.delta_f = p.omega_r - in.frame;
  c.two_chi = 2.0 * p.chi;
  c.kappa = p.kappa;
  c.sqrt_kappa = std::sqrt(p.kappa);
  c.g1 = std::isfinite(noise.t1) ? 1.0 / noise.t1 : 0.0;
  c.gphi = std::isfinite(noise.t_phi) ? 1.0 / noise.t_phi : 0.0;

  const double x_max = detail::max_hamiltonian_scale(c, sched.rabi_peak);
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  if (settings.dt * x_max > kTwoPi / 20.0)
    throw std::invalid_argument(
        "evolve: time step does not resolve the fastest Hamiltonian scale by 20 "
        "samples per period; shrink dt or move the frames");

  const int n_steps = static_cast<int>(std::lround(settings.t_end / settings.dt));

  rho6 rho = rho6::Zero();
  const cd g_amp = atom_init.first, e_amp = atom_init.second;
  rho(0, 0) = g_amp * std::conj(g_amp);
  rho(0, 1) = g_amp * std::conj(e_amp);
  rho(1, 0) = e_amp * std::conj(g_amp);
  rho(1, 1) = e_amp * std::conj(e_amp);

  trajectory traj;
  traj.dt = settings.dt;
  traj.rho_stride = settings.rho_stride;
  traj.a_expect.reserve(n_steps + 1);
  traj.atom_bloch.reserve(n_steps + 1);
  traj.atom_ex.reserve(n_steps + 1);

  auto record = [&](int k) {
    cd a(0.0, 0.0);
    for (int n = 0; n < 2; ++n) {
      const double root = std::sqrt(n + 1.0);
      a += root * (rho(2 * (n + 1), 2 * n) + rho(2 * (n + 1) + 1, 2 * n + 1));
    }
    traj.a_expect.push_back(a);
    cd r_ge(0.0, 0.0);
    double pg = 0.0, pe = 0.0;
    for (int n = 0; n < 3; ++n) {
      r_ge += rho(2 * n, 2 * n + 1);
      pg += rho(2 * n, 2 * n).real();
      pe += rho(2 * n + 1, 2 * n + 1).real();
    }
    traj.atom_bloch.push_back({2.0 * r_ge.real(), 2.0 * r_ge.imag(), pe - pg});
    traj.atom_ex.push_back(pe);
    const double trace = pg + pe;
    traj.trace_drift_max = std::max(traj.trace_drift_max, std::abs(trace - 1.0));
    traj.herm_asym_max =
        std::max(traj.herm_asym_max, (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff());
    traj.n2_max = std::max(traj.n2_max, rho(4, 4).real() + rho(5, 5).real());
    if (k % settings.rho_stride == 0 || k == n_steps) traj.rho_samples.push_back(rho);
    if (traj.trace_drift_max > 1e-6)
      throw std::runtime_error("evolve: trace drift exceeded 1e-6 at t = " +
                               std::to_string(k * settings.dt) + " ns");
  };

  const double dt = settings.dt;
  for (int k = 0; k < n_steps; ++k) {
    record(k);
    const double t = k * dt;
    const double r0 = sched.rabi(t), r1 = sched.rabi(t + 0.5 * dt), r2 = sched.rabi(t + dt);
    const cd a0 = in.amp(t), a1 = in.amp(t + 0.5 * dt), a2 = in.amp(t + dt);
    const rho6 k1 = detail::lindblad_rhs(c, r0, a0, rho);
    const rho6 k2 = detail::lindblad_rhs(c, r1, a1, rho + (0.5 * dt) * k1);
    const rho6 k3 = detail::lindblad_rhs(c, r1, a1, rho + (0.5 * dt) * k2);
    const rho6 k4 = detail::lindblad_rhs(c, r2, a2, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  record(n_steps);
  traj.rho_final = rho;
  return traj;
}

// Waveform-input overload: midpoint values are reconstructed by half-sample
// cubic interpolation, accurate for inputs sampled well below Nyquist. Pass an
// input_field closure for drives with structure near the grid limit.
inline trajectory evolve(const system_params& p, const drive_schedule& sched,
                         const waveform& in, const pure_qubit_state& atom_init,
                         const noise_params& noise, int rho_stride = 16) {
  if (std::abs(in.t0) > 1e-9)
    throw std::invalid_argument("evolve: input waveform must start at t = 0");
  if (in.samples.size() < 4) throw std::invalid_argument("evolve: input waveform too short");
  const std::vector<cd>& s = in.samples;
  const double dt = in.dt;
  const int n = static_cast<int>(s.size());
  input_field field;
  field.frame = in.frame;
  field.amp = [s, dt, n](double t) -> cd {
    const double x = t / dt;
    int k = static_cast<int>(std::floor(x + 0.5));
    if (k < 0) k = 0;
    if (k > n - 1) k = n - 1;
    if (std::abs(x - k) < 0.25) return s[k];
    const int j = static_cast<int>(std::floor(x));
    const int jm = std::max(j - 1, 0), j1 = std::min(j + 1, n - 1), j2 = std::min(j + 2, n - 1);
    return (-s[jm] + 9.0 * s[j] + 9.0 * s[j1] - s[j2]) / 16.0;
  };
  sim_settings settings;
  settings.dt = in.dt;
  settings.t_end = in.grid().span();
  settings.rho_stride = rho_stride;
  return evolve(p, sched, field, atom_init, noise, settings);
}

// One-port input-output relation xi(t) = alpha(t) - sqrt(kappa) <a(t)> on the
// trajectory's grid. The off-resonant limit reflects with r = +1 and the
// empty resonator on resonance with r = -1 under this sign convention.
inline waveform output_amplitude(const trajectory& traj, const input_field& in,
                                 const system_params& p) {
  waveform out;
  out.t0 = 0.0;
  out.dt = traj.dt;
  out.frame = in.frame;
  const double root = std::sqrt(p.kappa);
  out.samples.resize(traj.a_expect.size());
  for (size_t k = 0; k < traj.a_expect.size(); ++k)
    out.samples[k] = in.amp(k * traj.dt) - root * traj.a_expect[k];
  return out;
}

inline waveform output_amplitude(const trajectory& traj, const waveform& in,
                                 const system_params& p) {
  if (static_cast<int>(in.samples.size()) != static_cast<int>(traj.a_expect.size()) ||
      std::abs(in.dt - traj.dt) > 1e-12 || std::abs(in.t0) > 1e-9)
    throw std::invalid_argument("output_amplitude: input grid does not match the trajectory");
  waveform out = in;
  const double root = std::sqrt(p.kappa);
  for (size_t k = 0; k < out.samples.size(); ++k) out.samples[k] -= root * traj.a_expect[k];
  return out;
}

// ---------------------------------------------------------------------------
// Weak-probe linear response at a fixed drive point
// ---------------------------------------------------------------------------

// Scattering matrix between the two lower dressed branches for a weak probe
// at nu (lab frame): S(b', b) = delta - kappa sum_u A(b',u) A(b,u) / D with
// D = i (omega_ub - nu) + kappa / 2, omega_ub taken from the initial branch b,
// and A(b, u) = <b~| a |u~> the signed decay amplitudes.
inline Eigen::Matrix2cd weak_probe_smatrix(const dressed_solution& s, double kappa,
                                           double nu) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  Eigen::Matrix2d amp;  // amp(b, u): b over {1,2}, u over {3,4}
  for (int b = 0; b < 2; ++b)
    for (int u = 0; u < 2; ++u)
      amp(b, u) = s.vectors.col(b).dot(a * s.vectors.col(u + 2));
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Identity();
  for (int b = 0; b < 2; ++b) {
    for (int bp = 0; bp < 2; ++bp) {
      cd sum(0.0, 0.0);
      for (int u = 0; u < 2; ++u) {
        const double omega_ub = s.energy[u + 2] - s.energy[b];
        const cd d(0.5 * kappa, omega_ub - nu);
        sum += amp(bp, u) * amp(b, u) / d;
      }
      out(bp, b) -= kappa * sum;
    }
  }
  return out;
}

// Elastic weak-probe reflection for the system held in dressed branch 1 or 2:
// single-pole response of the nearest upper level,
// r = 1 - Gamma_ub / (i (omega_ub - nu) + kappa / 2).
inline cd steady_reflection(const dressed_solution& s, double kappa, double probe_omega,
                            int branch) {
  if (branch != 1 && branch != 2)
    throw std::invalid_argument("steady_reflection: branch must be 1 or 2");
  const int b = branch - 1;
  const double w3 = s.energy[2] - s.energy[b];
  const double w4 = s.energy[3] - s.energy[b];
  const bool pick4 = std::abs(w4 - probe_omega) <= std::abs(w3 - probe_omega);
  const double omega_ub = pick4 ? w4 : w3;
  const double gamma = pick4 ? (branch == 1 ? s.gamma41 : s.gamma42)
                             : (branch == 1 ? s.gamma31 : s.gamma32);
  if (gamma < 1e-9 * kappa)
    throw std::runtime_error("steady_reflection: nearest transition is dark at this drive");
  return 1.0 - gamma / cd(0.5 * kappa, omega_ub - probe_omega);
}

inline cd steady_reflection(const system_params& p, const drive_params& d,
                            double probe_omega, int branch, int ramp_steps = 200) {
  return steady_reflection(dressed_solve(p, d, ramp_steps), p.kappa, probe_omega, branch);
}

// ---------------------------------------------------------------------------
// Gate orchestration
// ---------------------------------------------------------------------------

struct swap_settings {
  double dt = 0.125;                // ns
  double t_p = 100.0;               // photon pulse length (amplitude FWHM / plateau)
  pulse_shape envelope = pulse_shape::gaussian;
  double pulse_edge_fwhm = 40.0;    // flat-top photon pulses only
  double drive_edge_fwhm = 40.0;    // drive ramp smoothing
  double pre_margin = 100.0;        // drive plateau ahead of the pulse support
  double post_margin = 100.0;       // drive plateau after the pulse support
  double tail = 300.0;              // drive-off settling time before readout
  int rho_stride = 16;
  int ramp_steps = 200;             // dressed-basis continuation resolution
};

struct swap_result {
  density_matrix2 atom;      // reduced atom state at t_end
  waveform input;            // sampled input pulse (frame omega_f)
  waveform output;           // xi(t) on the same grid
  dressed_solution dressed;
  double omega_f = 0.0;      // simulation frame: midpoint of the two carriers
  double t_center = 0.0;     // pulse center
  double t_end = 0.0;
  double phi_pre = 0.0;      // dressed 1-2 splitting phase accumulated before t_center
  double phi_post = 0.0;     // and after t_center
  cd k1{0.0, 0.0};           // weak-probe conversion/reflection products used
  cd k2{0.0, 0.0};           // by the overlap-phase calibration
  double resonator_residual = 0.0;  // photon population left at t_end
  bool residual_flagged = false;    // residual > 0.01
  double n2_max = 0.0;
  double trace_drift = 0.0;
};

namespace detail {

// Composite Simpson over [a, b] with at least the requested resolution.
template <class F>
double simpson(F f, double a, double b, double max_h) {
  if (b <= a) return 0.0;
  int m = static_cast<int>(std::ceil((b - a) / max_h));
  m += m % 2;
  if (m < 2) m = 2;
  const double h = (b - a) / m;
  double acc = f(a) + f(b);
  for (int k = 1; k < m; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace detail

// Runs the full gate: adiabatic drive ramp-on, photon-pulse scattering,
// ramp-off, settling. The drive must already be impedance-matched; the
// simulation frame is the midpoint of the two carriers so both beat terms
// stay slow. Returns the reduced atom state and the reflected amplitude.
inline swap_result run_swap(const system_params& p, const drive_params& d_matched,
                            const pure_qubit_state& atom_init,
                            const pure_qubit_state& photon_init, cd alpha,
                            const noise_params& noise, const swap_settings& st) {
  if (photon_init.basis != qubit_basis::photon)
    throw std::invalid_argument("run_swap: photon_init must be a photon state");
  if (std::norm(alpha) > 0.5)
    throw std::invalid_argument("run_swap: |alpha|^2 above the perturbative bound 0.5");

  swap_result res;
  res.dressed = dressed_solve(p, d_matched, st.ramp_steps);
  const auto [omega_l, omega_h] = transition_frequencies(res.dressed);
  res.omega_f = 0.5 * (omega_l + omega_h);

  const double half_support = st.envelope == pulse_shape::gaussian
                                  ? 2.0 * st.t_p
                                  : 0.5 * st.t_p + 2.0 * st.pulse_edge_fwhm;
  const double on50 = 2.0 * st.drive_edge_fwhm;
  const double plateau_start = on50 + 2.0 * st.drive_edge_fwhm;
  res.t_center = plateau_start + st.pre_margin + half_support;
  const double plateau_end = res.t_center + half_support + st.post_margin;
  const double off50 = plateau_end + 2.0 * st.drive_edge_fwhm;
  res.t_end = off50 + 2.0 * st.drive_edge_fwhm + st.tail;

  drive_schedule sched{d_matched.omega_d, d_matched.rabi, on50, off50, st.drive_edge_fwhm};

  const int n = static_cast<int>(std::lround(res.t_end / st.dt)) + 1;
  const time_grid grid{0.0, st.dt, n};
  res.t_end = grid.t(n - 1);

  pulse_spec spec;
  spec.envelope = st.envelope;
  spec.t_p = st.t_p;
  spec.edge_fwhm = st.pulse_edge_fwhm;
  spec.gamma1 = photon_init.first;
  spec.gamma2 = photon_init.second;
  spec.alpha = alpha;
  spec.omega_l = omega_l;
  spec.omega_h = omega_h;
  spec.center = res.t_center;
  const pulse_evaluator eval(spec, grid, res.omega_f);

  input_field field;
  field.frame = res.omega_f;
  field.amp = [eval](double t) { return eval(t); };

  sim_settings settings{st.dt, res.t_end, st.rho_stride};
  const trajectory traj = evolve(p, sched, field, atom_init, noise, settings);

  res.input = build_photon_pulse(spec, grid, res.omega_f);
  res.output = output_amplitude(traj, res.input, p);
  res.n2_max = traj.n2_max;
  res.trace_drift = traj.trace_drift_max;

  const rho6& rho = traj.rho_final;
  res.resonator_residual = 1.0 - (rho(0, 0).real() + rho(1, 1).real());
  res.residual_flagged = res.resonator_residual > 0.01;

  cd r00(0.0, 0.0), r01(0.0, 0.0), r11(0.0, 0.0);
  for (int m = 0; m < 3; ++m) {
    r00 += rho(2 * m, 2 * m);
    r01 += rho(2 * m, 2 * m + 1);
    r11 += rho(2 * m + 1, 2 * m + 1);
  }
  const double tr = r00.real() + r11.real();
  res.atom.basis = qubit_basis::atom;
  res.atom.rho00 = r00 / tr;
  res.atom.rho01 = r01 / tr;
  res.atom.rho10 = std::conj(r01) / tr;
  res.atom.rho11 = r11 / tr;

  // Dressed 1-2 splitting phase accumulated by the drive envelope; the
  // overlap-phase calibration needs it split at the pulse center.
  const double delta0 = p.omega_ge - d_matched.omega_d;
  auto split = [&](double t) { return std::hypot(delta0, sched.rabi(t)); };
  res.phi_pre = detail::simpson(split, 0.0, res.t_center, 0.25 * st.dt);
  res.phi_post = detail::simpson(split, res.t_center, res.t_end, 0.25 * st.dt);

  const Eigen::Matrix2cd s_h = weak_probe_smatrix(res.dressed, p.kappa, res.dressed.omega41);
  const Eigen::Matrix2cd s_l = weak_probe_smatrix(res.dressed, p.kappa, res.dressed.omega42);
  res.k1 = s_h(1, 0) * std::conj(s_l(0, 0));  // conversion from g x reflection at omega_L
  res.k2 = s_l(0, 1) * std::conj(s_h(1, 1));  // conversion from e x reflection at omega_H
  return res;
}

// Trajectory export: t, Re<a>, Im<a>, rho_ee, Re xi, Im xi.
inline void write_trajectory_csv(const std::string& path, const trajectory& traj,
                                 const waveform& xi) {
  if (xi.samples.size() != traj.a_expect.size())
    throw std::invalid_argument("write_trajectory_csv: xi grid does not match the trajectory");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << "t_ns,re_a,im_a,rho_ee,re_xi,im_xi\n";
  for (size_t k = 0; k < traj.a_expect.size(); ++k) {
    out << format_g17(k * traj.dt) << ',' << format_g17(traj.a_expect[k].real()) << ','
        << format_g17(traj.a_expect[k].imag()) << ',' << format_g17(traj.atom_ex[k]) << ','
        << format_g17(xi.samples[k].real()) << ',' << format_g17(xi.samples[k].imag()) << '\n';
  }
  if (!out) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

}  // namespace sprintsim
