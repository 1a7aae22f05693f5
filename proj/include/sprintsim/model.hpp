#pragma once

// Static physics of the driven dispersive atom-resonator system: bare and
// dressed level structure, radiative decay rates between dressed levels, and
// the numerical search for the impedance-matched drive point.
//
// Frame convention: atom operators rotate at the drive frequency omega_d, the
// resonator is not rotated. In that frame
//   H = delta_ge s+s- + omega_r a'a - 2 chi a'a s+s- + (rabi/2)(s+ + s-),
// with delta_ge = omega_ge - omega_d. Photon-number sectors decouple, and
// resonator (a-type) transitions connect states with the same atom-rotation
// phase, so their in-frame and lab frequencies coincide.
//
// Units: ns and rad/ns throughout (omega / 2pi is GHz).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sprintsim {

struct system_params {
  double omega_r = 0.0;   // resonator frequency, rad/ns
  double omega_ge = 0.0;  // atom g-e frequency, rad/ns
  double chi = 0.0;       // dispersive shift chi; the state-dependent pull is 2 chi
  double kappa = 0.0;     // resonator decay into the port, rad/ns
  double t1_atom = std::numeric_limits<double>::infinity();  // ns
  double t_phi = std::numeric_limits<double>::infinity();    // ns
};

struct drive_params {
  double omega_d = 0.0;  // rad/ns
  double rabi = 0.0;     // full Rabi matrix element: bare g-e splitting at resonance
};

enum class atom_state { g, e };

// Hard errors throw; soft model-validity concerns come back as warnings.
inline std::vector<std::string> validate_system(const system_params& p) {
  if (!(p.omega_r > 0.0) || !(p.omega_ge > 0.0))
    throw std::invalid_argument("system_params: frequencies must be positive");
  if (!(p.kappa > 0.0)) throw std::invalid_argument("system_params: kappa must be positive");
  if (p.chi == 0.0) throw std::invalid_argument("system_params: chi must be nonzero");
  if (!(p.t1_atom > 0.0) || !(p.t_phi > 0.0))
    throw std::invalid_argument("system_params: coherence times must be positive");
  std::vector<std::string> warnings;
  const double detuning = std::abs(p.omega_r - p.omega_ge);
  if (std::abs(2.0 * p.chi) > 0.1 * detuning)
    warnings.push_back("system_params: |2 chi| is not small against |omega_r - omega_ge|; "
                       "the dispersive model is strained");
  return warnings;
}

inline void validate_drive(const drive_params& d) {
  if (d.rabi < 0.0) throw std::invalid_argument("drive_params: rabi must be nonnegative");
  if (!(d.omega_d > 0.0)) throw std::invalid_argument("drive_params: omega_d must be positive");
}

// Lab-frame bare level frequency: |g,n> at n omega_r, |e,n> at
// omega_ge + n (omega_r - 2 chi).
inline double bare_frequency(const system_params& p, atom_state s, int n) {
  if (n != 0 && n != 1)
    throw std::invalid_argument("bare_frequency: photon number outside the truncated space");
  if (s == atom_state::g) return n * p.omega_r;
  return p.omega_ge + n * (p.omega_r - 2.0 * p.chi);
}

// Dressed levels of the driven system, truncated to photon numbers {0, 1}.
// Labels follow the bare states adiabatically from rabi = 0:
//   1 <- |g,0>,  2 <- |e,0>,  3 <- |e,1>,  4 <- |g,1>.
// energy[k] is the level with label k+1, in the atom-rotating frame.
// vectors.col(k) is its eigenvector over the bare basis {g0, e0, g1, e1}.
struct dressed_solution {
  std::array<double, 4> energy{};
  Eigen::Matrix4d vectors = Eigen::Matrix4d::Identity();
  std::array<int, 4> bare_origin{0, 1, 3, 2};
  double gamma31 = 0.0, gamma32 = 0.0, gamma41 = 0.0, gamma42 = 0.0;  // rad/ns
  double omega41 = 0.0, omega42 = 0.0;  // lab frame, rad/ns
};

namespace detail {

inline Eigen::Matrix4d rotating_hamiltonian(const system_params& p, double omega_d,
                                            double rabi) {
  const double delta_ge = p.omega_ge - omega_d;
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(0, 0) = 0.0;
  h(1, 1) = delta_ge;
  h(2, 2) = p.omega_r;
  h(3, 3) = delta_ge + p.omega_r - 2.0 * p.chi;
  h(0, 1) = h(1, 0) = 0.5 * rabi;
  h(2, 3) = h(3, 2) = 0.5 * rabi;
  return h;
}

}  // namespace detail

// Diagonalizes the rotating-frame Hamiltonian and assigns adiabatic labels by
// maximum-overlap continuation along a rabi ramp from zero. An ambiguous
// assignment (overlap below threshold, e.g. a degeneracy on the ramp) throws
// rather than guessing.
inline dressed_solution dressed_solve(const system_params& p, const drive_params& d,
                                      int ramp_steps = 200) {
  validate_system(p);
  validate_drive(d);
  if (ramp_steps < 1) throw std::invalid_argument("dressed_solve: ramp_steps must be >= 1");

  dressed_solution sol;
  // rabi = 0 start: bare states, in label order {g0, e0, e1, g1}.
  const Eigen::Matrix4d h0 = detail::rotating_hamiltonian(p, d.omega_d, 0.0);
  Eigen::Matrix4d vecs = Eigen::Matrix4d::Zero();
  vecs(0, 0) = 1.0;  // label 1 <- g0
  vecs(1, 1) = 1.0;  // label 2 <- e0
  vecs(3, 2) = 1.0;  // label 3 <- e1
  vecs(2, 3) = 1.0;  // label 4 <- g1
  std::array<double, 4> energy{h0(0, 0), h0(1, 1), h0(3, 3), h0(2, 2)};

  if (d.rabi > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver;
    for (int step = 1; step <= ramp_steps; ++step) {
      const double rabi = d.rabi * step / ramp_steps;
      solver.compute(detail::rotating_hamiltonian(p, d.omega_d, rabi));
      const Eigen::Matrix4d& w = solver.eigenvectors();
      const Eigen::Vector4d& ev = solver.eigenvalues();
      Eigen::Matrix4d next = Eigen::Matrix4d::Zero();
      std::array<bool, 4> taken{false, false, false, false};
      for (int label = 0; label < 4; ++label) {
        int best = -1;
        double best_dot = 0.0;
        for (int j = 0; j < 4; ++j) {
          const double dot = w.col(j).dot(vecs.col(label));
          if (std::abs(dot) > std::abs(best_dot)) {
            best_dot = dot;
            best = j;
          }
        }
        if (best < 0 || best_dot * best_dot < 0.6 || taken[best])
          throw std::runtime_error(
              "dressed_solve: adiabatic labeling ambiguous at rabi/2pi = " +
              std::to_string(rabi / (2.0 * 3.14159265358979323846)) +
              " GHz (near-degeneracy on the ramp); refine ramp_steps or move the drive");
        taken[best] = true;
        next.col(label) = (best_dot >= 0.0 ? 1.0 : -1.0) * w.col(best);
        energy[label] = ev(best);
      }
      vecs = next;
    }
  }

  sol.energy = energy;
  sol.vectors = vecs;

  // a restricted to the truncated space: |g,1> -> |g,0>, |e,1> -> |e,0>.
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  auto rate = [&](int upper_label, int lower_label) {
    const double elem = vecs.col(lower_label).dot(a * vecs.col(upper_label));
    return p.kappa * elem * elem;
  };
  sol.gamma31 = rate(2, 0);
  sol.gamma32 = rate(2, 1);
  sol.gamma41 = rate(3, 0);
  sol.gamma42 = rate(3, 1);

  // a-type transitions carry no frame offset (see header comment).
  sol.omega41 = energy[3] - energy[0];
  sol.omega42 = energy[3] - energy[1];
  return sol;
}

// (omega_L, omega_H) = (omega_42, omega_41), the lower and higher carriers.
inline std::pair<double, double> transition_frequencies(const dressed_solution& s) {
  if (!(s.omega41 > s.omega42))
    throw std::runtime_error("transition_frequencies: omega_41 <= omega_42 (labels inconsistent)");
  return {s.omega42, s.omega41};
}

// Sum of squared deviations of the four radiative rates from kappa/2; zero
// exactly at the impedance-matched point.
inline double match_mismatch(const dressed_solution& s, double kappa) {
  const double t = 0.5 * kappa;
  const double d31 = s.gamma31 - t, d32 = s.gamma32 - t;
  const double d41 = s.gamma41 - t, d42 = s.gamma42 - t;
  return d31 * d31 + d32 * d32 + d41 * d41 + d42 * d42;
}

struct match_result {
  drive_params drive;
  dressed_solution dressed;
  double mismatch = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
};

struct drive_scan_point {
  drive_params drive;
  dressed_solution dressed;
  double mismatch = std::numeric_limits<double>::infinity();
};

// Dense scan over a drive grid; rabi-major order, deterministic. Points where
// the labeling fails carry mismatch = +inf.
inline std::vector<drive_scan_point> scan_drive_grid(const system_params& p, double rabi_lo,
                                                     double rabi_hi, int n_rabi,
                                                     double omega_d_lo, double omega_d_hi,
                                                     int n_omega, int ramp_steps = 200) {
  if (n_rabi < 1 || n_omega < 1)
    throw std::invalid_argument("scan_drive_grid: grid must be nonempty");
  std::vector<drive_scan_point> out;
  out.reserve(static_cast<size_t>(n_rabi) * n_omega);
  for (int i = 0; i < n_rabi; ++i) {
    const double rabi =
        n_rabi == 1 ? rabi_lo : rabi_lo + (rabi_hi - rabi_lo) * i / (n_rabi - 1);
    for (int j = 0; j < n_omega; ++j) {
      const double omega_d =
          n_omega == 1 ? omega_d_lo : omega_d_lo + (omega_d_hi - omega_d_lo) * j / (n_omega - 1);
      drive_scan_point pt;
      pt.drive = {omega_d, rabi};
      try {
        pt.dressed = dressed_solve(p, pt.drive, ramp_steps);
        pt.mismatch = match_mismatch(pt.dressed, p.kappa);
      } catch (const std::runtime_error&) {
        pt.mismatch = std::numeric_limits<double>::infinity();
      }
      out.push_back(pt);
    }
  }
  return out;
}

// Finds the drive point where all four radiative rates equal kappa/2: a
// coarse rabi scan at the guessed drive frequency seeds a Nelder-Mead descent
// over (rabi, omega_d). The matching condition is degenerate along a valley
// in that plane, so the returned omega_d stays near the guess. Convergence
// means mismatch < (1e-4 kappa)^2; otherwise the best point is returned with
// converged = false and a diagnostic.
inline match_result find_impedance_match(const system_params& p, const drive_params& guess,
                                         int ramp_steps = 200) {
  validate_system(p);
  if (!(guess.omega_d > 0.0))
    throw std::invalid_argument("find_impedance_match: guess omega_d must be positive");

  auto objective = [&](double rabi, double omega_d) {
    if (rabi <= 0.0 || omega_d <= 0.0) return std::numeric_limits<double>::infinity();
    try {
      return match_mismatch(dressed_solve(p, {omega_d, rabi}, ramp_steps), p.kappa);
    } catch (const std::runtime_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Coarse log-spaced rabi scan at the guessed omega_d.
  double lo = guess.rabi > 0.0 ? guess.rabi / 4.0 : std::abs(2.0 * p.chi) / 50.0;
  double hi = guess.rabi > 0.0 ? guess.rabi * 4.0 : std::abs(2.0 * p.chi) * 2.0;
  double best_rabi = lo;
  double best_m = std::numeric_limits<double>::infinity();
  const int n_seed = 48;
  for (int i = 0; i < n_seed; ++i) {
    const double rabi = lo * std::pow(hi / lo, static_cast<double>(i) / (n_seed - 1));
    const double m = objective(rabi, guess.omega_d);
    if (m < best_m) {
      best_m = m;
      best_rabi = rabi;
    }
  }

  // Nelder-Mead on (rabi, omega_d). A small simplex keeps the search local to
  // the guess along the degenerate valley.
  struct vertex {
    double rabi, omega_d, m;
  };
  const double d_omega = 2.0 * 3.14159265358979323846 * 0.001;
  std::array<vertex, 3> simplex{
      vertex{best_rabi, guess.omega_d, best_m},
      vertex{best_rabi * 1.1, guess.omega_d, objective(best_rabi * 1.1, guess.omega_d)},
      vertex{best_rabi, guess.omega_d + d_omega, objective(best_rabi, guess.omega_d + d_omega)}};

  const double tol = 1e-4 * p.kappa * 1e-4 * p.kappa;
  const int max_iter = 400;
  int iter = 0;
  auto order = [&] {
    std::sort(simplex.begin(), simplex.end(),
              [](const vertex& a, const vertex& b) { return a.m < b.m; });
  };
  order();
  for (; iter < max_iter && simplex[0].m >= tol; ++iter) {
    const double cr = 0.5 * (simplex[0].rabi + simplex[1].rabi);
    const double co = 0.5 * (simplex[0].omega_d + simplex[1].omega_d);
    const vertex& worst = simplex[2];
    auto eval_at = [&](double f) {
      vertex v{cr + f * (cr - worst.rabi), co + f * (co - worst.omega_d), 0.0};
      v.m = objective(v.rabi, v.omega_d);
      return v;
    };
    vertex refl = eval_at(1.0);
    if (refl.m < simplex[0].m) {
      vertex exp_v = eval_at(2.0);
      simplex[2] = exp_v.m < refl.m ? exp_v : refl;
    } else if (refl.m < simplex[1].m) {
      simplex[2] = refl;
    } else {
      vertex con = eval_at(refl.m < worst.m ? 0.5 : -0.5);
      if (con.m < std::min(refl.m, worst.m)) {
        simplex[2] = con;
      } else {
        for (int k = 1; k < 3; ++k) {
          simplex[k].rabi = 0.5 * (simplex[k].rabi + simplex[0].rabi);
          simplex[k].omega_d = 0.5 * (simplex[k].omega_d + simplex[0].omega_d);
          simplex[k].m = objective(simplex[k].rabi, simplex[k].omega_d);
        }
      }
    }
    order();
  }

  match_result res;
  res.drive = {simplex[0].omega_d, simplex[0].rabi};
  res.mismatch = simplex[0].m;
  res.iterations = iter;
  res.converged = simplex[0].m < tol;
  if (!res.converged)
    res.diagnostic = "find_impedance_match: mismatch " + std::to_string(simplex[0].m) +
                     " above tolerance " + std::to_string(tol) + " after " +
                     std::to_string(iter) + " iterations";
  res.dressed = dressed_solve(p, res.drive, ramp_steps);
  return res;
}

}  // namespace sprintsim
