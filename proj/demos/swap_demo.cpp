// Runs one gate in each direction on a fast wideband device and prints the
// reconstructed states next to their targets. A compact smoke test of the
// whole stack: matching, scattering, tomography, and both estimators.

#include <cstdio>
#include <string>

#include "sprintsim/batteries.hpp"

using namespace sprintsim;

namespace {

void print_density(const char* name, const density_matrix2& rho) {
  std::printf("  %-10s [%7.4f  %7.4f%+7.4fi]\n", name, rho.rho00.real(), rho.rho01.real(),
              rho.rho01.imag());
  std::printf("  %-10s [%7.4f%+7.4fi  %7.4f]\n", "", rho.rho10.real(), rho.rho10.imag(),
              rho.rho11.real());
}

experiment_config demo_config() {
  experiment_config cfg;
  cfg.omega_r_ghz = 10.258;
  cfg.omega_ge_ghz = 5.839;
  cfg.two_chi_ghz = 0.6263;
  cfg.kappa_ghz = 0.0564;
  cfg.rabi_ghz = 0.26;
  cfg.omega_d_ghz = 5.3563;
  cfg.t_p_ns = 150.0;
  cfg.dt_ns = 0.0625;
  cfg.pre_margin_ns = 50.0;
  cfg.post_margin_ns = 50.0;
  cfg.tail_ns = 150.0;
  cfg.drive_edge_fwhm_ns = 20.0;
  cfg.alpha_sq = {0.0, 0.02, 0.05};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  experiment_config cfg = demo_config();
  if (argc > 1) cfg = load_config(argv[1]);

  std::printf("impedance matching...\n");
  const swap_context ctx = make_context(cfg);
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  std::printf("  rabi/2pi = %.4f GHz, omega_d/2pi = %.4f GHz\n", ctx.drive.rabi / two_pi,
              ctx.drive.omega_d / two_pi);
  std::printf("  omega_L/2pi = %.4f GHz, omega_H/2pi = %.4f GHz\n\n", ctx.omega_l / two_pi,
              ctx.omega_h / two_pi);

  const double r = 1.0 / std::sqrt(2.0);

  std::printf("photon -> atom, input (|wL> + i|wH>)/sqrt2\n");
  const pure_qubit_state atom_g{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::atom};
  const pure_qubit_state photon_in{cd(r, 0.0), cd(0.0, r), qubit_basis::photon};
  const swap_result baseline = zero_input_run(ctx, atom_g);
  const tomography_record base_rec =
      simulate_tomography(baseline.atom, 0.0, ctx.noise, ctx.tomo, 0);
  const p2a_estimate pa = estimate_photon_to_atom(ctx, atom_g, baseline, base_rec, photon_in,
                                                  cfg.alpha_sq, 1);
  print_density("estimate", pa.rho);
  print_density("target", bloch_to_density(bloch_of(pa.target), qubit_basis::atom));
  std::printf("  fidelity  %.5f\n\n", pa.fid);

  std::printf("atom -> photon, input (|g> - i|e>)/sqrt2\n");
  const pure_qubit_state atom_in{cd(r, 0.0), cd(0.0, -r), qubit_basis::atom};
  const auto photons = cardinal_states(qubit_basis::photon);
  const double y = cfg.alpha_sq.back();
  const pure_qubit_state atom_e{cd(0.0, 0.0), cd(1.0, 0.0), qubit_basis::atom};
  const swap_result zl = run_swap(ctx.system, ctx.drive, atom_g, photons[0], cd(std::sqrt(y), 0.0),
                                  ctx.noise, ctx.settings);
  const swap_result zh = run_swap(ctx.system, ctx.drive, atom_e, photons[1], cd(std::sqrt(y), 0.0),
                                  ctx.noise, ctx.settings);
  const swap_result rl = run_swap(ctx.system, ctx.drive, atom_in, photons[0], cd(std::sqrt(y), 0.0),
                                  ctx.noise, ctx.settings);
  const swap_result rh = run_swap(ctx.system, ctx.drive, atom_in, photons[1], cd(std::sqrt(y), 0.0),
                                  ctx.noise, ctx.settings);
  const a2p_estimate ap = estimate_atom_to_photon(atom_in, zl.output, zh.output, rl, rh);
  std::printf("  eta (calibrated):\n");
  std::printf("    [%7.4f%+7.4fi  %7.4f%+7.4fi]\n", ap.eta.ll.real(), ap.eta.ll.imag(),
              ap.eta.lh.real(), ap.eta.lh.imag());
  std::printf("    [%7.4f%+7.4fi  %7.4f%+7.4fi]\n", ap.eta.hl.real(), ap.eta.hl.imag(),
              ap.eta.hh.real(), ap.eta.hh.imag());
  print_density("estimate", ap.rho);
  print_density("target", bloch_to_density(bloch_of(ap.target), qubit_basis::photon));
  std::printf("  fidelity  %.5f\n", ap.fid);
  return 0;
}
