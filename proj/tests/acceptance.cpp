// Acceptance gate: every primary requirement runs end to end and prints one
// pass or fail line. The process exits nonzero if any line fails, so the
// suite can gate a release on its own.

#include <sprintsim/batteries.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace sprintsim;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

std::string config_dir() {
  const char* env = std::getenv("SPRINTSIM_CONFIG_DIR");
  return env != nullptr ? env : "configs";
}

int hw_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct criterion {
  std::string name;
  bool passed = true;
  std::ostringstream detail;

  explicit criterion(std::string n) : name(std::move(n)) {}

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }

  void note(const std::string& what) {
    detail << (detail.str().empty() ? "" : "; ") << what;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// Frozen measured tomography rows: six excitation probabilities per photon
// number and the Bloch vector each must reconstruct to.
struct tomo_row {
  double alpha_sq;
  std::array<double, 6> p;
  double ax, ay, az;
};

const std::vector<tomo_row>& frozen_tomo_rows() {
  static const std::vector<tomo_row> rows = {
      {0.0000, {0.0371, 0.9226, 0.4953, 0.4965, 0.4812, 0.4821}, 0.0141, 0.0144, -0.8855},
      {0.1950, {0.0721, 0.8306, 0.4795, 0.5452, 0.4823, 0.4124}, -0.0028, 0.1328, -0.7585},
      {0.4992, {0.1950, 0.7358, 0.4800, 0.6442, 0.4697, 0.3084}, 0.0103, 0.3358, -0.5408},
  };
  return rows;
}

std::vector<tomography_record> frozen_tomo_records() {
  std::vector<tomography_record> recs;
  for (const auto& row : frozen_tomo_rows()) {
    tomography_record r;
    r.alpha_sq = row.alpha_sq;
    r.p_tilde = row.p;
    recs.push_back(r);
  }
  return recs;
}

// Frozen measured overlap matrices with the reconstruction each must yield
// and its fidelity against the image of (|g> - i|e>)/sqrt(2).
struct eta_row {
  eta_matrix eta;
  double rho_hh;
  cd rho_hl;
  double fidelity;
};

eta_matrix make_eta(cd ll, cd lh, cd hl, cd hh) {
  eta_matrix e;
  e.ll = ll;
  e.lh = lh;
  e.hl = hl;
  e.hh = hh;
  e.normalized = true;
  return e;
}

const std::vector<eta_row>& frozen_eta_rows() {
  static const std::vector<eta_row> rows = {
      {make_eta({0.515, 0.057}, {-0.095, 0.187}, {-0.003, -0.277}, {0.485, -0.057}),
       0.485, {-0.049, -0.232}, 0.732},
      {make_eta({0.509, 0.043}, {-0.113, 0.215}, {0.042, -0.333}, {0.491, -0.043}),
       0.491, {-0.036, -0.274}, 0.774},
      {make_eta({0.502, 0.056}, {-0.106, 0.204}, {0.030, -0.282}, {0.498, -0.056}),
       0.498, {-0.038, -0.243}, 0.743},
      {make_eta({0.503, 0.058}, {-0.121, 0.162}, {0.038, -0.330}, {0.497, -0.058}),
       0.497, {-0.042, -0.246}, 0.746},
  };
  return rows;
}

pure_qubit_state equator_target_photon() {
  const double r = 1.0 / std::sqrt(2.0);
  return pure_qubit_state{r, cd(0.0, -r), qubit_basis::photon};
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

criterion check_tomo_rows() {
  criterion c("six-outcome tomography reproduces the frozen bloch vectors");
  double worst = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& row : frozen_tomo_rows()) {
    tomography_record rec;
    rec.alpha_sq = row.alpha_sq;
    rec.p_tilde = row.p;
    const bloch_vector b = tomo_bloch(rec);
    worst = std::max({worst, std::abs(b.x - row.ax), std::abs(b.y - row.ay),
                      std::abs(b.z - row.az)});
  }
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  c.require(worst <= 1e-4, "bloch error " + fmt(worst) + " above 1e-4");
  c.require(ms < 1.0, "runtime " + fmt(ms) + " ms above 1 ms");
  c.note("max err " + fmt(worst) + ", " + fmt(ms) + " ms");
  return c;
}

criterion check_slope_example() {
  criterion c("slope pipeline reproduces the frozen worked example");
  const auto records = frozen_tomo_records();
  const auto t0 = std::chrono::steady_clock::now();
  const density_matrix2 rho = photon_to_atom_estimate(records);
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  const double bx = 2.0 * rho.rho10.real();
  const double by = -2.0 * rho.rho10.imag();
  const double bz = 2.0 * rho.rho11.real() - 1.0;
  c.require(std::abs(bx - (-0.0032)) <= 1e-3, "b_x " + fmt(bx));
  c.require(std::abs(by - 0.6459) <= 1e-3, "b_y " + fmt(by));
  c.require(std::abs(bz - (-0.3074)) <= 1e-3, "b_z " + fmt(bz));
  c.require(std::abs(rho.rho11.real() - 0.3463) <= 1e-3, "rho_ee " + fmt(rho.rho11.real()));
  c.require(std::abs(rho.rho10 - cd(-0.0016, -0.3229)) <= 1e-3,
            "rho_eg off by " + fmt(std::abs(rho.rho10 - cd(-0.0016, -0.3229))));
  c.require(ms < 1.0, "runtime " + fmt(ms) + " ms above 1 ms");
  c.note("b = (" + fmt(bx) + ", " + fmt(by) + ", " + fmt(bz) + "), " + fmt(ms) + " ms");
  return c;
}

criterion check_eta_rows() {
  criterion c("overlap-matrix reconstruction reproduces the frozen rows");
  const pure_qubit_state target = equator_target_photon();
  std::vector<density_matrix2> rhos;
  double worst = 0.0;
  for (const auto& row : frozen_eta_rows()) {
    const density_matrix2 rho = hermitize(row.eta);
    const double fid = fidelity(target, rho);
    worst = std::max({worst, std::abs(rho.rho11.real() - row.rho_hh),
                      std::abs(rho.rho10 - row.rho_hl), std::abs(fid - row.fidelity)});
    rhos.push_back(rho);
  }
  c.require(worst <= 1e-3, "per-row error " + fmt(worst) + " above 1e-3");
  const density_matrix2 avg = average_density(rhos);
  const double avg_fid = fidelity(target, avg);
  c.require(std::abs(avg.rho11.real() - 0.493) <= 1e-3, "avg rho_hh " + fmt(avg.rho11.real()));
  c.require(std::abs(avg.rho10 - cd(-0.041, -0.249)) <= 1e-3,
            "avg rho_hl off by " + fmt(std::abs(avg.rho10 - cd(-0.041, -0.249))));
  c.require(std::abs(avg_fid - 0.749) <= 1e-3, "avg fidelity " + fmt(avg_fid));
  c.note("worst row err " + fmt(worst) + ", avg fidelity " + fmt(avg_fid));
  return c;
}

criterion check_matching() {
  criterion c("impedance matching hits the stored device frequencies");
  const auto t0 = std::chrono::steady_clock::now();
  const experiment_config cfg = load_config(config_dir() + "/photon_to_atom.cfg");
  const system_params p = cfg.to_system();
  const match_result res = find_impedance_match(p, cfg.drive_guess());
  c.require(res.converged, "matcher did not converge: " + res.diagnostic);
  if (res.converged) {
    const double half = 0.5 * p.kappa;
    for (double g : {res.dressed.gamma31, res.dressed.gamma32, res.dressed.gamma41,
                     res.dressed.gamma42})
      c.require(std::abs(g - half) <= 0.01 * p.kappa,
                "rate " + fmt(g / kTwoPi) + " GHz off kappa/2");
    const auto [lo, hi] = transition_frequencies(res.dressed);
    c.require(std::abs(lo / kTwoPi - 10.208) <= 0.01, "omega_l " + fmt(lo / kTwoPi));
    c.require(std::abs(hi / kTwoPi - 10.266) <= 0.01, "omega_h " + fmt(hi / kTwoPi));

    // Independent oracle: no point of a dense neighborhood grid beats the
    // converged mismatch.
    const auto grid = scan_drive_grid(
        p, res.drive.rabi * 0.9, res.drive.rabi * 1.1, 21,
        res.drive.omega_d - kTwoPi * 0.005, res.drive.omega_d + kTwoPi * 0.005, 21, 60);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& pt : grid) best = std::min(best, pt.mismatch);
    c.require(res.mismatch <= best + 1e-12, "grid found a better point");
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(s < 10.0, "runtime " + fmt(s) + " s above 10 s");
  c.note(fmt(s) + " s");
  return c;
}

criterion check_ideal_batteries() {
  criterion c("noise-off cardinal batteries clear the fidelity floors");
  const auto t0 = std::chrono::steady_clock::now();
  const experiment_config cfg = load_config(config_dir() + "/ideal_swap.cfg");
  const swap_context ctx = make_context(cfg);
  const cardinal_grid_result grid = cardinal_grid_battery(ctx, cfg.alpha_sq, 1, hw_threads());
  c.require(grid.p2a_average > 0.98,
            "photon-to-atom average " + fmt(grid.p2a_average) + " not above 0.98");
  c.require(grid.a2p_average > 0.95,
            "atom-to-photon average " + fmt(grid.a2p_average) + " not above 0.95");
  for (const auto& pe : grid.p2a)
    c.require(pe.fid >= 0.0 && pe.fid <= 1.0, "fidelity outside [0,1]");
  for (const auto& pe : grid.a2p)
    c.require(pe.fid >= 0.0 && pe.fid <= 1.0, "fidelity outside [0,1]");
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(s < 300.0, "runtime " + fmt(s) + " s above 5 min");
  c.note("p2a avg " + fmt(grid.p2a_average) + ", a2p avg " + fmt(grid.a2p_average) + ", " +
         fmt(s) + " s");
  return c;
}

criterion check_decoherence_ordering() {
  criterion c("decoherence keeps poles above equators inside the stated band");
  const experiment_config cfg = load_config(config_dir() + "/decoherence.cfg");
  const swap_context ctx = make_context(cfg);

  const p2a_scan_result p2a = p2a_scan(ctx, cfg.theta_count, cfg.alpha_sq, 1, hw_threads());
  const double p2a_pole_min = std::min(p2a.cardinals[0].fid, p2a.cardinals[1].fid);
  double p2a_eq_max = 0.0;
  for (int j = 2; j < 6; ++j) p2a_eq_max = std::max(p2a_eq_max, p2a.cardinals[j].fid);
  c.require(p2a_pole_min > p2a_eq_max, "photon-to-atom poles do not beat equators");
  c.require(p2a.cardinals[0].fid > 0.97,
            "low-carrier input fidelity " + fmt(p2a.cardinals[0].fid) + " not above 0.97");
  c.require(p2a.average_fidelity >= 0.75 && p2a.average_fidelity <= 0.90,
            "photon-to-atom average " + fmt(p2a.average_fidelity) + " outside [0.75, 0.90]");

  const a2p_scan_result a2p = a2p_scan(ctx, cfg.alpha_sq, hw_threads());
  const double a2p_pole_min = std::min(a2p.average_fidelities[0], a2p.average_fidelities[1]);
  double a2p_eq_max = 0.0;
  for (int j = 2; j < 6; ++j) a2p_eq_max = std::max(a2p_eq_max, a2p.average_fidelities[j]);
  c.require(a2p_pole_min > a2p_eq_max, "atom-to-photon poles do not beat equators");
  c.require(a2p.average_fidelities[0] > 0.97,
            "ground-state fidelity " + fmt(a2p.average_fidelities[0]) + " not above 0.97");

  c.note("p2a poles/equators " + fmt(p2a_pole_min) + "/" + fmt(p2a_eq_max) + " avg " +
         fmt(p2a.average_fidelity) + "; a2p poles/equators " + fmt(a2p_pole_min) + "/" +
         fmt(a2p_eq_max));
  return c;
}

criterion check_invariants() {
  criterion c("physics invariant suite holds");

  system_params device;
  device.omega_r = kTwoPi * 10.258;
  device.omega_ge = kTwoPi * 5.839;
  device.chi = kTwoPi * 0.073 / 2.0;
  device.kappa = kTwoPi * 0.024;

  system_params wide;
  wide.omega_r = kTwoPi * 10.258;
  wide.omega_ge = kTwoPi * 5.839;
  wide.chi = kTwoPi * 0.6263 / 2.0;
  wide.kappa = kTwoPi * 0.0564;

  const pure_qubit_state atom_g{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::atom};
  const pure_qubit_state atom_e{cd(0.0, 0.0), cd(1.0, 0.0), qubit_basis::atom};
  const pure_qubit_state photon_h{cd(0.0, 0.0), cd(1.0, 0.0), qubit_basis::photon};

  // Rate sum rule at arbitrary drive points.
  {
    double worst = 0.0;
    for (double rabi : {0.002, 0.011, 0.0320312, 0.07, 0.15}) {
      for (double w : {5.75, 5.785, 5.80, 5.82}) {
        const dressed_solution s = dressed_solve(device, {kTwoPi * w, kTwoPi * rabi});
        worst = std::max({worst, std::abs(s.gamma31 + s.gamma32 - device.kappa),
                          std::abs(s.gamma41 + s.gamma42 - device.kappa)});
      }
    }
    c.require(worst <= 1e-9 * device.kappa, "rate sums drift " + fmt(worst / device.kappa));
  }

  // Trace preservation and linearity on a wideband matched gate.
  const match_result wide_match =
      find_impedance_match(wide, {kTwoPi * (5.839 - 0.4827), 0.0});
  c.require(wide_match.converged, "wideband match failed");
  if (wide_match.converged) {
    swap_settings st;
    st.dt = 0.0625;
    const double y1 = 0.0125;
    const swap_result r1 = run_swap(wide, wide_match.drive, atom_e, photon_h,
                                    cd(std::sqrt(y1), 0.0), noise_params{}, st);
    const swap_result r2 = run_swap(wide, wide_match.drive, atom_e, photon_h,
                                    cd(2.0 * std::sqrt(y1), 0.0), noise_params{}, st);
    c.require(r1.trace_drift < 1e-9, "trace drift " + fmt(r1.trace_drift));
    double peak = 0.0, worst = 0.0;
    for (size_t k = 0; k < r2.output.samples.size(); ++k) {
      peak = std::max(peak, std::abs(r2.output.samples[k]));
      worst = std::max(worst, std::abs(r2.output.samples[k] - 2.0 * r1.output.samples[k]));
    }
    c.require(worst < 0.01 * peak, "output nonlinearity " + fmt(worst / peak));
  }

  // Integrator step halving on the stored device gate.
  const match_result dev_match = find_impedance_match(device, {kTwoPi * 5.785, 0.0});
  c.require(dev_match.converged, "device match failed");
  if (dev_match.converged) {
    swap_settings st;
    st.dt = 0.125;
    st.tail = 100.0;
    const cd alpha(std::sqrt(0.05), 0.0);
    const swap_result coarse =
        run_swap(device, dev_match.drive, atom_g, photon_h, alpha, noise_params{}, st);
    st.dt = 0.0625;
    const swap_result fine =
        run_swap(device, dev_match.drive, atom_g, photon_h, alpha, noise_params{}, st);
    const double drift = std::abs(coarse.atom.rho11.real() - fine.atom.rho11.real());
    c.require(drift < 1e-6, "step-halving drift " + fmt(drift));
  }

  // Parseval on a dichromatic photon pulse.
  {
    const time_grid grid{0.0, 0.125, static_cast<int>(std::lround(1600.0 / 0.125)) + 1};
    pulse_spec spec;
    spec.t_p = 100.0;
    spec.alpha = cd(0.7, 0.0);
    spec.gamma1 = cd(1.0 / std::sqrt(2.0), 0.0);
    spec.gamma2 = cd(1.0 / std::sqrt(2.0), 0.0);
    spec.omega_l = kTwoPi * 10.208;
    spec.omega_h = kTwoPi * 10.266;
    const waveform w = build_photon_pulse(spec, grid, kTwoPi * 10.237);
    const spectrum s = fft_spectrum(w);
    double sp = 0.0;
    for (const cd& v : s.values) sp += std::norm(v);
    sp *= s.df;
    c.require(std::abs(sp - power(w)) <= 1e-9 * power(w),
              "Parseval drift " + fmt(std::abs(sp - power(w)) / power(w)));
  }

  // Ball projection idempotence.
  {
    const bloch_vector outside{0.9, -1.2, 0.7};
    const bloch_vector once = project_to_ball(outside);
    const bloch_vector twice = project_to_ball(once);
    c.require(once.x == twice.x && once.y == twice.y && once.z == twice.z,
              "projection is not idempotent");
    const bloch_vector inside{0.1, 0.2, -0.3};
    const bloch_vector kept = project_to_ball(inside);
    c.require(kept.x == inside.x && kept.y == inside.y && kept.z == inside.z,
              "projection moved an interior point");
  }

  return c;
}

}  // namespace

int main() {
  std::vector<criterion> results;
  results.push_back(check_tomo_rows());
  results.push_back(check_slope_example());
  results.push_back(check_eta_rows());
  results.push_back(check_matching());
  results.push_back(check_ideal_batteries());
  results.push_back(check_decoherence_ordering());
  results.push_back(check_invariants());

  int failures = 0;
  for (const auto& c : results) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
    if (!c.detail.str().empty()) std::cout << " (" << c.detail.str() << ")";
    std::cout << '\n';
    if (!c.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
