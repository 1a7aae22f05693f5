#pragma once

// The two reconstruction pipelines operating on measured (or simulated)
// records:
//   A. atom tomography: six-gate excitation probabilities -> Bloch vector,
//      least-squares slopes over the photon-number grid, ball projection;
//   B. photon state from waveform overlaps against calibration references,
//      Hermitization by closest density matrix, averaging.
//
// Bloch conventions match qmath: z = rho_11 - rho_00 and rho_01 = (x + iy)/2,
// so rho_eg = (b_x - i b_y)/2 for the atom pipeline.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sprintsim/dynamics.hpp"
#include "sprintsim/qmath.hpp"
#include "sprintsim/signal.hpp"

namespace sprintsim {

struct tomography_record {
  std::array<double, 6> p_tilde{};  // excitation probability after gate j
  double alpha_sq = 0.0;            // mean photon number of the run
  double theta = 0.0;               // metadata: superposition angle
  std::string label;                // metadata: initial states
};

// Gate set for the six-outcome tomography, in the (g, e) basis:
// U_1 = I, U_2 = sigma_x, U_j = (I - i cos(j pi/2) sigma_x
//                                  - i sin(j pi/2) sigma_y) / sqrt(2), j = 3..6.
// sigma_y here is oriented so that p_3 = (1+x)/2 and p_6 = (1-y)/2 in the
// Bloch convention above.
inline std::array<Eigen::Matrix2cd, 6> tomo_gates() {
  const cd i(0.0, 1.0);
  Eigen::Matrix2cd sx, sy;
  sx << 0.0, 1.0, 1.0, 0.0;
  sy << 0.0, i, -i, 0.0;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  std::array<Eigen::Matrix2cd, 6> u;
  u[0] = id;
  u[1] = sx;
  for (int j = 3; j <= 6; ++j) {
    const double c = std::cos(j * 1.57079632679489662);
    const double s = std::sin(j * 1.57079632679489662);
    u[j - 1] = (id - i * c * sx - i * s * sy) / std::sqrt(2.0);
  }
  return u;
}

// Excitation probability after each tomography gate, p_j = <e|U_j rho U_j'|e>.
inline std::array<double, 6> tomo_probabilities(const density_matrix2& rho) {
  Eigen::Matrix2cd m;
  m << rho.rho00, rho.rho01, rho.rho10, rho.rho11;
  const auto gates = tomo_gates();
  std::array<double, 6> p{};
  for (int j = 0; j < 6; ++j) {
    const Eigen::Matrix2cd rotated = gates[j] * m * gates[j].adjoint();
    p[j] = std::min(1.0, std::max(0.0, rotated(1, 1).real()));
  }
  return p;
}

// Least-squares Bloch vector from the six probabilities, projected into the
// unit ball: (p3 - p5, p4 - p6, p1 - p2).
inline bloch_vector tomo_bloch(const tomography_record& r) {
  for (double p : r.p_tilde)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("tomo_bloch: probabilities must lie in [0, 1]");
  return project_to_ball({r.p_tilde[2] - r.p_tilde[4], r.p_tilde[3] - r.p_tilde[5],
                          r.p_tilde[0] - r.p_tilde[1]});
}

// Closed-form least-squares slope: (N C2 - C3 C4) / (N C1 - C3^2) with
// C1 = sum x^2, C2 = sum xy, C3 = sum x, C4 = sum y.
inline double slope_fit(const std::vector<std::pair<double, double>>& points) {
  const double n = static_cast<double>(points.size());
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (const auto& [x, y] : points) {
    c1 += x * x;
    c2 += x * y;
    c3 += x;
    c4 += y;
  }
  const double denom = n * c1 - c3 * c3;
  if (points.size() < 2 || !(std::abs(denom) > 1e-30 * (1.0 + c1 * n)))
    throw std::invalid_argument("slope_fit: needs two or more distinct abscissae");
  return (n * c2 - c3 * c4) / denom;
}

// Slope pipeline with an explicit zero-photon baseline: the measured Bloch
// vector obeys a(y) = (1 - y) a0 + y p to first order in the photon number y,
// so slope + a0 estimates the transferred state p for any initial atom state.
inline density_matrix2 photon_to_atom_estimate(const std::vector<tomography_record>& records,
                                               const bloch_vector& baseline) {
  if (records.size() < 2)
    throw std::invalid_argument("photon_to_atom_estimate: needs two or more photon numbers");
  std::vector<std::pair<double, double>> px, py, pz;
  for (const auto& r : records) {
    const bloch_vector a = tomo_bloch(r);
    px.emplace_back(r.alpha_sq, a.x);
    py.emplace_back(r.alpha_sq, a.y);
    pz.emplace_back(r.alpha_sq, a.z);
  }
  const bloch_vector b{slope_fit(px) + baseline.x, slope_fit(py) + baseline.y,
                       slope_fit(pz) + baseline.z};
  return bloch_to_density(project_to_ball(b), qubit_basis::atom);
}

// The published variant: initial atom state |g>, baseline (0, 0, -1), giving
// b_x = slope(a_x), b_y = slope(a_y), b_z = slope(a_z) - 1.
inline density_matrix2 photon_to_atom_estimate(const std::vector<tomography_record>& records) {
  return photon_to_atom_estimate(records, {0.0, 0.0, -1.0});
}

// ---------------------------------------------------------------------------
// Measurement-stage model for simulated tomography
// ---------------------------------------------------------------------------

// Amplitude damping plus pure dephasing applied for a fixed idle duration.
inline density_matrix2 atom_decay(const density_matrix2& rho, const noise_params& noise,
                                  double duration) {
  if (duration < 0.0) throw std::invalid_argument("atom_decay: negative duration");
  validate_noise(noise);
  const double g1 = std::isfinite(noise.t1) ? 1.0 / noise.t1 : 0.0;
  const double gphi = std::isfinite(noise.t_phi) ? 1.0 / noise.t_phi : 0.0;
  const double keep = std::exp(-g1 * duration);
  const double coh = std::exp(-(0.5 * g1 + gphi) * duration);
  density_matrix2 out = rho;
  out.rho11 = rho.rho11 * keep;
  out.rho00 = rho.rho00 + rho.rho11 * (1.0 - keep);
  out.rho01 = rho.rho01 * coh;
  out.rho10 = rho.rho10 * coh;
  return out;
}

// Tomography-stage timing. Defaults are instantaneous and perfect; the study
// preset models three 20 ns control pulses plus a 300 ns readout window.
struct tomo_settings {
  double wait_ns = 0.0;     // idle before the gate (control-pulse duration)
  double readout_ns = 0.0;  // excitation must survive this long to be read out
  int shots = 0;            // 0 = analytic probabilities, > 0 = sampled
  static tomo_settings study_default() { return {60.0, 300.0, 0}; }
};

// Simulates the measurement stage on a reduced atom state: idle decay, the
// six gates, excitation survival through readout, assignment-error mixing
// p~ = F_e p + (1 - F_g)(1 - p), and optional finite-shot binomial sampling.
inline tomography_record simulate_tomography(const density_matrix2& atom, double alpha_sq,
                                             const noise_params& noise,
                                             const tomo_settings& settings,
                                             std::uint64_t seed = 0) {
  if (settings.shots < 0) throw std::invalid_argument("simulate_tomography: negative shots");
  const density_matrix2 idled = atom_decay(atom, noise, settings.wait_ns);
  std::array<double, 6> p = tomo_probabilities(idled);
  const double survive =
      std::isfinite(noise.t1) ? std::exp(-settings.readout_ns / noise.t1) : 1.0;
  std::mt19937_64 rng(seed);
  tomography_record rec;
  rec.alpha_sq = alpha_sq;
  for (int j = 0; j < 6; ++j) {
    double q = p[j] * survive;
    q = noise.read_fid_e * q + (1.0 - noise.read_fid_g) * (1.0 - q);
    if (settings.shots > 0) {
      std::binomial_distribution<int> dist(settings.shots, q);
      q = static_cast<double>(dist(rng)) / settings.shots;
    }
    rec.p_tilde[j] = q;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Photon-state reconstruction from waveform overlaps
// ---------------------------------------------------------------------------

struct eta_matrix {
  cd ll{0.0, 0.0};
  cd lh{0.0, 0.0};
  cd hl{0.0, 0.0};
  cd hh{0.0, 0.0};
  bool normalized = false;
};

// eta_ij = overlap(zeta_i, xi_j) for i, j in {L, H}, trace-normalized by
// 1/(eta_LL + eta_HH). xi_L and xi_H are the outputs of the two runs (input
// carrier omega_L and omega_H); zeta are the calibration references.
inline eta_matrix eta_build(const waveform& zeta_l, const waveform& zeta_h,
                            const waveform& xi_l, const waveform& xi_h) {
  eta_matrix eta;
  eta.ll = overlap(zeta_l, xi_l);
  eta.lh = overlap(zeta_l, xi_h);
  eta.hl = overlap(zeta_h, xi_l);
  eta.hh = overlap(zeta_h, xi_h);
  const cd trace = eta.ll + eta.hh;
  const double scale = std::max({std::abs(eta.ll), std::abs(eta.lh), std::abs(eta.hl),
                                 std::abs(eta.hh), 1e-300});
  if (std::abs(trace) < 1e-9 * scale)
    throw std::runtime_error("eta_build: vanishing trace, references do not see the output");
  eta.ll /= trace;
  eta.lh /= trace;
  eta.hl /= trace;
  eta.hh /= trace;
  eta.normalized = true;
  return eta;
}

// Removes the deterministic phases the transfer imprints on the measured
// off-diagonals: the scattering products k1/k2 from the matched point and the
// dressed-splitting phase accumulated before the pulse center. The sign
// conventions here are fixed by the end-to-end battery and live only here.
inline eta_matrix calibrate_eta(const eta_matrix& eta, cd k1, cd k2, double phi_pre) {
  eta_matrix out = eta;
  const cd i(0.0, 1.0);
  out.lh *= std::exp(-i * (std::arg(k1) + phi_pre));
  out.hl *= std::exp(-i * (std::arg(k2) - phi_pre));
  return out;
}

// Closest density matrix to a (generally non-Hermitian) normalized eta:
// Bloch components v_x = Re(eta_LH + eta_HL), v_y = Im(eta_LH - eta_HL),
// v_z = Re(eta_HH - eta_LL), projected into the unit ball, in the photon
// (L, H) basis.
inline density_matrix2 hermitize(const eta_matrix& eta) {
  if (!eta.normalized) throw std::invalid_argument("hermitize: eta must be normalized");
  const bloch_vector v = project_to_ball({(eta.lh + eta.hl).real(),
                                          (eta.lh - eta.hl).imag(),
                                          (eta.hh - eta.ll).real()});
  return bloch_to_density(v, qubit_basis::photon);
}

// Entrywise mean; convexity keeps the result a valid density matrix.
inline density_matrix2 average_density(const std::vector<density_matrix2>& list) {
  if (list.empty()) throw std::invalid_argument("average_density: empty list");
  density_matrix2 out;
  out.basis = list.front().basis;
  out.rho00 = out.rho01 = out.rho10 = out.rho11 = cd(0.0, 0.0);
  for (const auto& rho : list) {
    if (rho.basis != out.basis)
      throw std::invalid_argument("average_density: mixed bases");
    out.rho00 += rho.rho00;
    out.rho01 += rho.rho01;
    out.rho10 += rho.rho10;
    out.rho11 += rho.rho11;
  }
  const double n = static_cast<double>(list.size());
  out.rho00 /= n;
  out.rho01 /= n;
  out.rho10 /= n;
  out.rho11 /= n;
  return out;
}

}  // namespace sprintsim
