#pragma once

// Two-level state algebra: Bloch vectors, 2x2 density matrices, pure states,
// fidelities and the six cardinal states.
//
// Convention used throughout: sigma_z = +1 on the SECOND basis element
// (|e> for the atom basis, |w_H> for the photon basis), so
//   rho_11 = (1 + z) / 2   and   rho_01 = (x + i y) / 2.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace sprintsim {

using cd = std::complex<double>;

enum class qubit_basis { atom, photon };

struct bloch_vector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline bloch_vector operator+(const bloch_vector& a, const bloch_vector& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

inline bloch_vector operator-(const bloch_vector& a, const bloch_vector& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

inline bloch_vector operator*(double s, const bloch_vector& v) {
  return {s * v.x, s * v.y, s * v.z};
}

inline double dot(const bloch_vector& a, const bloch_vector& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

// Rotates the equatorial components by `angle` (radians) about +z.
inline bloch_vector rotate_about_z(const bloch_vector& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

struct density_matrix2 {
  cd rho00{0.0, 0.0};
  cd rho01{0.0, 0.0};
  cd rho10{0.0, 0.0};
  cd rho11{0.0, 0.0};
  qubit_basis basis = qubit_basis::atom;
};

struct pure_qubit_state {
  cd first{1.0, 0.0};
  cd second{0.0, 0.0};
  qubit_basis basis = qubit_basis::atom;

  double norm() const { return std::sqrt(std::norm(first) + std::norm(second)); }
};

// Same amplitudes, different basis tag. Used when mapping a photon target
// onto the atom (and vice versa) for fidelity bookkeeping.
inline pure_qubit_state rebased(const pure_qubit_state& s, qubit_basis basis) {
  return {s.first, s.second, basis};
}

inline bloch_vector bloch_of(const pure_qubit_state& s) {
  const cd c = s.first * std::conj(s.second);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(s.second) - std::norm(s.first)};
}

// Shrinks v onto the unit ball: v / max(1, |v|). Idempotent.
inline bloch_vector project_to_ball(const bloch_vector& v) {
  const double n = v.norm();
  if (n <= 1.0) return v;
  return (1.0 / n) * v;
}

// Accepts |v| <= 1 + 1e-9 (tiny excess from round-off is renormalized
// silently); anything larger is a caller bug.
inline density_matrix2 bloch_to_density(const bloch_vector& v, qubit_basis basis) {
  bloch_vector u = v;
  const double n = u.norm();
  if (n > 1.0 + 1e-9)
    throw std::invalid_argument("bloch_to_density: |v| = " + std::to_string(n) +
                                " exceeds the unit ball");
  if (n > 1.0) u = (1.0 / n) * u;
  density_matrix2 rho;
  rho.rho00 = cd(0.5 * (1.0 - u.z), 0.0);
  rho.rho11 = cd(0.5 * (1.0 + u.z), 0.0);
  rho.rho01 = cd(0.5 * u.x, 0.5 * u.y);
  rho.rho10 = std::conj(rho.rho01);
  rho.basis = basis;
  return rho;
}

inline bloch_vector density_to_bloch(const density_matrix2& rho) {
  return {2.0 * rho.rho01.real(), 2.0 * rho.rho01.imag(),
          rho.rho11.real() - rho.rho00.real()};
}

// Eigenvalues of a Hermitian 2x2 density matrix, descending.
inline std::array<double, 2> density_eigenvalues(const density_matrix2& rho) {
  const double tr = rho.rho00.real() + rho.rho11.real();
  const double det = (rho.rho00 * rho.rho11 - rho.rho01 * rho.rho10).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

// <psi| rho |psi>, clamped to [0, 1]. Eigenvalue negativity down to -1e-9
// (round-off scale) is tolerated; worse than that is rejected.
inline double fidelity(const pure_qubit_state& psi, const density_matrix2& rho) {
  if (psi.basis != rho.basis)
    throw std::invalid_argument("fidelity: state and density matrix live in different bases");
  const cd a = psi.first, b = psi.second;
  const cd f = std::conj(a) * rho.rho00 * a + std::conj(a) * rho.rho01 * b +
               std::conj(b) * rho.rho10 * a + std::conj(b) * rho.rho11 * b;
  if (std::abs(f.imag()) > 1e-9)
    throw std::domain_error("fidelity: expectation has a non-real part; rho is not Hermitian");
  const double v = f.real();
  if (v < -1e-9 || v > 1.0 + 1e-9)
    throw std::domain_error("fidelity: expectation outside [0, 1]; rho is not a state");
  return std::min(1.0, std::max(0.0, v));
}

// Half the trace norm of rho - sigma; equals half the Bloch-vector distance
// for qubit states.
inline double trace_distance(const density_matrix2& rho, const density_matrix2& sigma) {
  if (rho.basis != sigma.basis)
    throw std::invalid_argument("trace_distance: density matrices live in different bases");
  const cd d00 = rho.rho00 - sigma.rho00;
  const cd d01 = rho.rho01 - sigma.rho01;
  const cd d10 = rho.rho10 - sigma.rho10;
  const cd d11 = rho.rho11 - sigma.rho11;
  // Difference is Hermitian traceless up to round-off: eigenvalues +-lambda.
  const double tr = (d00 + d11).real();
  const cd det = d00 * d11 - d01 * d10;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det.real()));
  return 0.5 * (std::abs(0.5 * (tr + disc)) + std::abs(0.5 * (tr - disc)));
}

// The six cardinal states: both poles, then the equator at relative phases
// 0, pi/2, pi, 3pi/2 on the second amplitude.
inline std::array<pure_qubit_state, 6> cardinal_states(qubit_basis basis) {
  const double r = 1.0 / std::sqrt(2.0);
  return {{{cd(1, 0), cd(0, 0), basis},
           {cd(0, 0), cd(1, 0), basis},
           {cd(r, 0), cd(r, 0), basis},
           {cd(r, 0), cd(0, r), basis},
           {cd(r, 0), cd(-r, 0), basis},
           {cd(r, 0), cd(0, -r), basis}}};
}

}  // namespace sprintsim
