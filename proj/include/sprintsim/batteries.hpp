#pragma once

// Experiment batteries shared by the command-line driver and the acceptance
// suite: matched-context construction, the photon-to-atom tomography
// pipeline, the atom-to-photon overlap pipeline, and the cardinal grids
// built on them. All deterministic-phase calibration constants live here and
// in calibrate_eta; nothing downstream re-derives them.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sprintsim/config.hpp"
#include "sprintsim/threadpool.hpp"

namespace sprintsim {

// Impedance-match search failed to converge; the CLI maps this to exit 3.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct swap_context {
  system_params system;
  drive_params drive;  // matched (auto) or taken verbatim (manual)
  dressed_solution dressed;
  double omega_l = 0.0;
  double omega_h = 0.0;
  swap_settings settings;
  noise_params noise;
  tomo_settings tomo;
  bool auto_matched = false;
  match_result match;  // populated only when auto_matched
};

inline swap_context make_context(const experiment_config& cfg) {
  swap_context ctx;
  ctx.system = cfg.to_system();
  validate_system(ctx.system);
  ctx.settings = cfg.to_swap();
  ctx.noise = cfg.to_noise();
  ctx.tomo = cfg.to_tomo();
  if (cfg.drive_auto()) {
    ctx.match = find_impedance_match(ctx.system, cfg.drive_guess(), ctx.settings.ramp_steps);
    if (!ctx.match.converged) throw convergence_error(ctx.match.diagnostic);
    ctx.drive = ctx.match.drive;
    ctx.dressed = ctx.match.dressed;
    ctx.auto_matched = true;
  } else {
    ctx.drive = cfg.drive_guess();
    ctx.dressed = dressed_solve(ctx.system, ctx.drive, ctx.settings.ramp_steps);
  }
  const auto [wl, wh] = transition_frequencies(ctx.dressed);
  ctx.omega_l = wl;
  ctx.omega_h = wh;
  return ctx;
}

// The gate copies amplitudes across registers: (g, e) <-> (w_L, w_H).
inline pure_qubit_state transfer_image(const pure_qubit_state& s) {
  return {s.first, s.second,
          s.basis == qubit_basis::atom ? qubit_basis::photon : qubit_basis::atom};
}

inline const std::array<std::string, 6>& atom_labels() {
  static const std::array<std::string, 6> l = {"g", "e", "xp", "yp", "xm", "ym"};
  return l;
}

inline const std::array<std::string, 6>& photon_labels() {
  static const std::array<std::string, 6> l = {"wl", "wh", "xp", "yp", "xm", "ym"};
  return l;
}

namespace detail {

// Deterministic coherence phase the transfer leaves on the atom: the
// scattering product at the matched point plus the dressed-splitting
// precession accumulated after the pulse center.
inline double p2a_phase(const swap_result& r) { return std::arg(r.k1) - r.phi_post; }

inline density_matrix2 rotate_coherence(density_matrix2 rho, double phase) {
  rho.rho10 *= std::polar(1.0, phase);
  rho.rho01 = std::conj(rho.rho10);
  return rho;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t item) {
  // splitmix64 step: decorrelates per-item readout sampling streams.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (item + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Photon -> atom pipeline
// ---------------------------------------------------------------------------

struct p2a_estimate {
  pure_qubit_state photon{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::photon};
  pure_qubit_state target{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::atom};
  std::vector<tomography_record> records;  // one per photon number, y = 0 first
  density_matrix2 rho;                     // calibrated estimate
  double fid = 0.0;
};

// Runs the transfer at each photon number, simulates the measurement stage,
// and feeds the records through the slope pipeline with the measured y = 0
// baseline. `baseline` is the zero-input run shared across photon states.
inline p2a_estimate estimate_photon_to_atom(const swap_context& ctx,
                                            const pure_qubit_state& atom_init,
                                            const swap_result& baseline,
                                            const tomography_record& baseline_record,
                                            const pure_qubit_state& photon,
                                            const std::vector<double>& y_grid,
                                            std::uint64_t seed) {
  p2a_estimate est;
  est.photon = photon;
  est.target = transfer_image(photon);
  est.records.push_back(baseline_record);
  double phase = detail::p2a_phase(baseline);
  std::uint64_t item = 0;
  for (double y : y_grid) {
    if (y <= 0.0) continue;
    const swap_result run = run_swap(ctx.system, ctx.drive, atom_init, photon,
                                     cd(std::sqrt(y), 0.0), ctx.noise, ctx.settings);
    est.records.push_back(simulate_tomography(run.atom, y, ctx.noise, ctx.tomo,
                                              detail::mix_seed(seed, ++item)));
    phase = detail::p2a_phase(run);
  }
  const bloch_vector a0 = tomo_bloch(est.records.front());
  est.rho = detail::rotate_coherence(photon_to_atom_estimate(est.records, a0), -phase);
  est.fid = fidelity(est.target, est.rho);
  return est;
}

inline swap_result zero_input_run(const swap_context& ctx, const pure_qubit_state& atom_init) {
  const pure_qubit_state dummy{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::photon};
  return run_swap(ctx.system, ctx.drive, atom_init, dummy, cd(0.0, 0.0), ctx.noise,
                  ctx.settings);
}

// ---------------------------------------------------------------------------
// Atom -> photon pipeline
// ---------------------------------------------------------------------------

struct a2p_estimate {
  pure_qubit_state atom{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::atom};
  pure_qubit_state target{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::photon};
  eta_matrix eta;       // calibrated
  density_matrix2 rho;  // hermitized estimate
  double fid = 0.0;
};

// Reconstructs the emitted photon state from the two signal runs of one atom
// state (input carrier w_L, then w_H) against the elastic calibration
// references zeta_L (atom g, input w_L) and zeta_H (atom e, input w_H).
inline a2p_estimate estimate_atom_to_photon(const pure_qubit_state& atom_init,
                                            const waveform& zeta_l, const waveform& zeta_h,
                                            const swap_result& run_l,
                                            const swap_result& run_h) {
  a2p_estimate est;
  est.atom = atom_init;
  est.target = transfer_image(atom_init);
  const eta_matrix raw = eta_build(zeta_l, zeta_h, run_l.output, run_h.output);
  est.eta = calibrate_eta(raw, run_l.k1, run_l.k2, run_l.phi_pre);
  est.rho = hermitize(est.eta);
  est.fid = fidelity(est.target, est.rho);
  return est;
}

// ---------------------------------------------------------------------------
// Cardinal grids
// ---------------------------------------------------------------------------

struct pair_estimate {
  int atom = 0;    // cardinal index
  int photon = 0;  // cardinal index, -1 for the atom->photon rows
  density_matrix2 rho;
  double fid = 0.0;
};

struct cardinal_grid_result {
  std::vector<pair_estimate> p2a;  // 36 rows, atom-major
  std::vector<pair_estimate> a2p;  // 6 rows
  double p2a_average = 0.0;
  double a2p_average = 0.0;
};

// Full 6 x 6 battery: every initial atom state against every input photon
// state. The photon->atom estimate runs per pair over the y grid (with the
// per-atom zero-input baseline); the atom->photon estimate reuses each atom
// row's pure-carrier columns at the largest y.
inline cardinal_grid_result cardinal_grid_battery(const swap_context& ctx,
                                                  const std::vector<double>& y_grid,
                                                  std::uint64_t seed, int threads) {
  const auto atoms = cardinal_states(qubit_basis::atom);
  const auto photons = cardinal_states(qubit_basis::photon);
  std::vector<double> ys;
  for (double y : y_grid)
    if (y > 0.0) ys.push_back(y);
  if (ys.empty()) throw std::invalid_argument("cardinal_grid_battery: need a nonzero photon number");
  const double y_sig = ys.back();

  // Work items: 6 zero-input baselines, then 36 x |ys| pair runs.
  struct item {
    int atom, photon;
    double y;  // 0 marks a baseline
  };
  std::vector<item> items;
  for (int i = 0; i < 6; ++i) items.push_back({i, -1, 0.0});
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (double y : ys) items.push_back({i, j, y});

  std::vector<swap_result> runs(items.size());
  parallel_for(static_cast<int>(items.size()), threads, [&](int k) {
    const item& it = items[static_cast<size_t>(k)];
    swap_result& slot = runs[static_cast<size_t>(k)];
    if (it.photon < 0)
      slot = zero_input_run(ctx, atoms[static_cast<size_t>(it.atom)]);
    else
      slot = run_swap(ctx.system, ctx.drive, atoms[static_cast<size_t>(it.atom)],
                      photons[static_cast<size_t>(it.photon)], cd(std::sqrt(it.y), 0.0),
                      ctx.noise, ctx.settings);
    // Only the pure-carrier columns at the signal photon number feed the
    // overlap pipeline; drop the other waveforms to bound grid memory.
    slot.input.samples.clear();
    slot.input.samples.shrink_to_fit();
    if (!(it.photon >= 0 && it.photon <= 1 && it.y == y_sig)) {
      slot.output.samples.clear();
      slot.output.samples.shrink_to_fit();
    }
  });

  auto run_at = [&](int i, int j, double y) -> const swap_result& {
    for (size_t k = 0; k < items.size(); ++k)
      if (items[k].atom == i && items[k].photon == j && items[k].y == y) return runs[k];
    throw std::logic_error("cardinal_grid_battery: missing run");
  };

  cardinal_grid_result res;
  for (int i = 0; i < 6; ++i) {
    const swap_result& base = run_at(i, -1, 0.0);
    const tomography_record base_rec = simulate_tomography(
        base.atom, 0.0, ctx.noise, ctx.tomo, detail::mix_seed(seed, 600 + i));
    const bloch_vector a0 = tomo_bloch(base_rec);
    for (int j = 0; j < 6; ++j) {
      std::vector<tomography_record> recs = {base_rec};
      double phase = detail::p2a_phase(base);
      for (size_t u = 0; u < ys.size(); ++u) {
        const swap_result& run = run_at(i, j, ys[u]);
        recs.push_back(simulate_tomography(
            run.atom, ys[u], ctx.noise, ctx.tomo,
            detail::mix_seed(seed, static_cast<std::uint64_t>((i * 6 + j) * 16 + u))));
        phase = detail::p2a_phase(run);
      }
      pair_estimate pe;
      pe.atom = i;
      pe.photon = j;
      pe.rho = detail::rotate_coherence(photon_to_atom_estimate(recs, a0), -phase);
      pe.fid = fidelity(transfer_image(photons[static_cast<size_t>(j)]), pe.rho);
      res.p2a.push_back(pe);
      res.p2a_average += pe.fid / 36.0;
    }
  }

  const waveform& zeta_l = run_at(0, 0, y_sig).output;
  const waveform& zeta_h = run_at(1, 1, y_sig).output;
  for (int i = 0; i < 6; ++i) {
    const a2p_estimate est = estimate_atom_to_photon(
        atoms[static_cast<size_t>(i)], zeta_l, zeta_h, run_at(i, 0, y_sig), run_at(i, 1, y_sig));
    pair_estimate pe;
    pe.atom = i;
    pe.photon = -1;
    pe.rho = est.rho;
    pe.fid = est.fid;
    res.a2p.push_back(pe);
    res.a2p_average += pe.fid / 6.0;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Command batteries
// ---------------------------------------------------------------------------

struct theta_row {
  double theta = 0.0;
  double alpha_sq = 0.0;
  double rho_ee = 0.0;  // raw measured point, before slope extrapolation
  cd rho_eg{0.0, 0.0};
};

struct p2a_scan_result {
  std::vector<theta_row> rows;          // theta-major, then photon number
  std::vector<p2a_estimate> cardinals;  // six input photon states
  double average_fidelity = 0.0;
};

// Ground-state atom, equator sweep plus the six-cardinal summary.
inline p2a_scan_result p2a_scan(const swap_context& ctx, int theta_count,
                                const std::vector<double>& y_grid, std::uint64_t seed,
                                int threads) {
  if (theta_count < 1) throw std::invalid_argument("p2a_scan: theta_count must be positive");
  const pure_qubit_state atom_g{cd(1.0, 0.0), cd(0.0, 0.0), qubit_basis::atom};
  const double r = 1.0 / std::sqrt(2.0);
  constexpr double two_pi = 2.0 * 3.14159265358979323846;

  std::vector<double> ys;
  for (double y : y_grid)
    if (y > 0.0) ys.push_back(y);
  if (ys.empty()) throw std::invalid_argument("p2a_scan: need a nonzero photon number");

  const swap_result baseline = zero_input_run(ctx, atom_g);
  const tomography_record baseline_record =
      simulate_tomography(baseline.atom, 0.0, ctx.noise, ctx.tomo, detail::mix_seed(seed, 0));

  // Equator sweep rows: raw measured Bloch points per (theta, y).
  struct sweep_item {
    double theta, y;
  };
  std::vector<sweep_item> sweep;
  for (int k = 0; k < theta_count; ++k) {
    const double theta = two_pi * k / (theta_count > 1 ? theta_count - 1 : 1);
    for (double y : ys) sweep.push_back({theta, y});
  }
  std::vector<theta_row> rows(sweep.size());
  parallel_for(static_cast<int>(sweep.size()), threads, [&](int k) {
    const auto& it = sweep[static_cast<size_t>(k)];
    const pure_qubit_state photon{cd(r, 0.0), std::polar(r, it.theta), qubit_basis::photon};
    const swap_result run = run_swap(ctx.system, ctx.drive, atom_g, photon,
                                     cd(std::sqrt(it.y), 0.0), ctx.noise, ctx.settings);
    const tomography_record rec = simulate_tomography(
        run.atom, it.y, ctx.noise, ctx.tomo, detail::mix_seed(seed, 1000 + k));
    const bloch_vector a = tomo_bloch(rec);
    theta_row& row = rows[static_cast<size_t>(k)];
    row.theta = it.theta;
    row.alpha_sq = it.y;
    row.rho_ee = 0.5 * (1.0 + a.z);
    row.rho_eg = 0.5 * cd(a.x, -a.y);
  });

  p2a_scan_result res;
  res.rows = std::move(rows);
  res.cardinals.resize(6);
  const auto photons = cardinal_states(qubit_basis::photon);
  parallel_for(6, threads, [&](int j) {
    res.cardinals[static_cast<size_t>(j)] =
        estimate_photon_to_atom(ctx, atom_g, baseline, baseline_record,
                                photons[static_cast<size_t>(j)], ys,
                                detail::mix_seed(seed, 2000 + static_cast<std::uint64_t>(j)));
  });
  for (const auto& c : res.cardinals) res.average_fidelity += c.fid / 6.0;
  return res;
}

struct a2p_state_result {
  int atom = 0;
  double alpha_sq = 0.0;
  a2p_estimate estimate;
  waveform output_l;  // signal run outputs, for time-domain and FFT emission
  waveform output_h;
};

struct a2p_scan_result {
  std::vector<a2p_state_result> states;    // y-major, then cardinal
  std::vector<density_matrix2> averages;   // per cardinal, averaged over y
  std::vector<double> average_fidelities;  // per cardinal
  double average_fidelity = 0.0;
};

// Six-cardinal battery at each configured photon number; per-y estimates plus
// the per-state average over photon numbers.
inline a2p_scan_result a2p_scan(const swap_context& ctx, const std::vector<double>& y_grid,
                                int threads) {
  const auto atoms = cardinal_states(qubit_basis::atom);
  const auto photons = cardinal_states(qubit_basis::photon);
  std::vector<double> ys;
  for (double y : y_grid)
    if (y > 0.0) ys.push_back(y);
  if (ys.empty()) throw std::invalid_argument("a2p_scan: need a nonzero photon number");

  struct item {
    int atom, carrier;  // carrier: 0 = w_L input, 1 = w_H input
    double y;
  };
  std::vector<item> items;
  for (double y : ys)
    for (int i = 0; i < 6; ++i)
      for (int c = 0; c < 2; ++c) items.push_back({i, c, y});
  std::vector<swap_result> runs(items.size());
  parallel_for(static_cast<int>(items.size()), threads, [&](int k) {
    const item& it = items[static_cast<size_t>(k)];
    runs[static_cast<size_t>(k)] =
        run_swap(ctx.system, ctx.drive, atoms[static_cast<size_t>(it.atom)],
                 photons[static_cast<size_t>(it.carrier)], cd(std::sqrt(it.y), 0.0), ctx.noise,
                 ctx.settings);
  });
  auto run_at = [&](int i, int c, double y) -> const swap_result& {
    for (size_t k = 0; k < items.size(); ++k)
      if (items[k].atom == i && items[k].carrier == c && items[k].y == y) return runs[k];
    throw std::logic_error("a2p_scan: missing run");
  };

  a2p_scan_result res;
  std::vector<std::vector<density_matrix2>> per_state(6);
  std::vector<double> fid_sum(6, 0.0);
  for (double y : ys) {
    const waveform& zeta_l = run_at(0, 0, y).output;
    const waveform& zeta_h = run_at(1, 1, y).output;
    for (int i = 0; i < 6; ++i) {
      a2p_state_result st;
      st.atom = i;
      st.alpha_sq = y;
      st.estimate = estimate_atom_to_photon(atoms[static_cast<size_t>(i)], zeta_l, zeta_h,
                                            run_at(i, 0, y), run_at(i, 1, y));
      st.output_l = run_at(i, 0, y).output;
      st.output_h = run_at(i, 1, y).output;
      per_state[static_cast<size_t>(i)].push_back(st.estimate.rho);
      fid_sum[static_cast<size_t>(i)] += st.estimate.fid;
      res.states.push_back(std::move(st));
    }
  }
  for (int i = 0; i < 6; ++i) {
    res.averages.push_back(average_density(per_state[static_cast<size_t>(i)]));
    res.average_fidelities.push_back(fid_sum[static_cast<size_t>(i)] / ys.size());
    res.average_fidelity += res.average_fidelities.back() / 6.0;
  }
  return res;
}

}  // namespace sprintsim
