#pragma once

// Complex baseband waveforms on uniform time grids: pulse envelopes,
// dichromatic photon pulses, spectra and overlap integrals.
//
// Units: time in ns, angular frequency in rad/ns (so omega / 2pi is GHz).
// A waveform's `frame` is the absolute angular frequency its samples are
// referenced to; the physical field is samples(t) * exp(-i * frame * t).
// Sample units are sqrt(photons / ns): sum |s|^2 dt integrates to a mean
// photon number.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sprintsim/qmath.hpp"

namespace sprintsim {

struct time_grid {
  double t0 = 0.0;
  double dt = 0.125;
  int n = 0;

  double t(int k) const { return t0 + dt * k; }
  double span() const { return dt * (n - 1); }
  double mid() const { return t0 + 0.5 * span(); }
};

struct waveform {
  double t0 = 0.0;
  double dt = 0.125;
  double frame = 0.0;  // rad/ns
  std::vector<cd> samples;

  time_grid grid() const { return {t0, dt, static_cast<int>(samples.size())}; }
};

inline double power(const waveform& w) {
  double p = 0.0;
  for (const cd& s : w.samples) p += std::norm(s);
  return p * w.dt;
}

namespace detail {

inline void require_same_grid(const waveform& a, const waveform& b, const char* who) {
  const bool ok = a.samples.size() == b.samples.size() &&
                  std::abs(a.dt - b.dt) < 1e-12 && std::abs(a.t0 - b.t0) < 1e-9 &&
                  std::abs(a.frame - b.frame) < 1e-9;
  if (!ok) throw std::invalid_argument(std::string(who) + ": waveforms on different grids or frames");
}

}  // namespace detail

// <zeta|xi> = sum conj(zeta) * xi * dt.
inline cd overlap(const waveform& zeta, const waveform& xi) {
  detail::require_same_grid(zeta, xi, "overlap");
  cd acc(0.0, 0.0);
  for (size_t k = 0; k < xi.samples.size(); ++k)
    acc += std::conj(zeta.samples[k]) * xi.samples[k];
  return acc * zeta.dt;
}

// Reference carrier all absolute frames are quoted against (rad/ns).
inline constexpr double carrier_omega_c = 2.0 * 3.14159265358979323846 * 10.308;

// Re-expresses the same physical field against a different reference
// frequency. Frame changes are always this explicit operation.
inline waveform reframe(const waveform& w, double new_frame) {
  waveform out = w;
  out.frame = new_frame;
  const double delta = w.frame - new_frame;
  for (size_t k = 0; k < out.samples.size(); ++k) {
    const double t = w.t0 + static_cast<double>(k) * w.dt;
    out.samples[k] *= std::polar(1.0, -delta * t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Envelopes
// ---------------------------------------------------------------------------

// sigma of a Gaussian whose amplitude FWHM is `fwhm`.
inline double gaussian_sigma(double fwhm) {
  return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

// Unit-power Gaussian amplitude centered at `center`, amplitude FWHM = t_p:
// (pi sigma^2)^(-1/4) exp(-(t - c)^2 / (2 sigma^2)).
inline double gaussian_amplitude(double t, double center, double t_p) {
  const double s = gaussian_sigma(t_p);
  const double u = (t - center) / s;
  return std::pow(3.14159265358979323846 * s * s, -0.25) * std::exp(-0.5 * u * u);
}

// Unit-amplitude flat top: a rectangle of length `plateau` (measured between
// the 50% crossings) convolved with a Gaussian of amplitude FWHM `edge_fwhm`.
// edge_fwhm -> 0 degenerates to the hard rectangle.
inline double flat_top_amplitude(double t, double plateau_start, double plateau_end,
                                 double edge_fwhm) {
  if (edge_fwhm < 1e-12)
    return (t >= plateau_start && t < plateau_end) ? 1.0 : 0.0;
  const double s = gaussian_sigma(edge_fwhm) * std::sqrt(2.0);
  return 0.5 * (std::erf((t - plateau_start) / s) - std::erf((t - plateau_end) / s));
}

// Samples the unit-power Gaussian envelope on `grid`, centered at the grid
// midpoint. The grid must extend at least +-3 t_p around the center.
inline std::vector<double> gaussian_envelope(double t_p, const time_grid& grid) {
  if (t_p <= 0.0) throw std::invalid_argument("gaussian_envelope: t_p must be positive");
  if (grid.n < 2) throw std::invalid_argument("gaussian_envelope: empty grid");
  if (grid.span() < 6.0 * t_p)
    throw std::invalid_argument("gaussian_envelope: grid shorter than +-3 t_p around the pulse");
  std::vector<double> env(grid.n);
  for (int k = 0; k < grid.n; ++k)
    env[k] = gaussian_amplitude(grid.t(k), grid.mid(), t_p);
  return env;
}

// Samples the unit-amplitude flat top on `grid`, centered at the grid
// midpoint. The plateau must be long enough to carry its smoothed edges.
inline std::vector<double> flat_top_envelope(double plateau, double edge_fwhm,
                                             const time_grid& grid) {
  if (plateau <= 0.0) throw std::invalid_argument("flat_top_envelope: plateau must be positive");
  if (plateau < 2.0 * edge_fwhm)
    throw std::invalid_argument("flat_top_envelope: plateau shorter than its edge support");
  if (grid.n < 2) throw std::invalid_argument("flat_top_envelope: empty grid");
  const double a = grid.mid() - 0.5 * plateau;
  const double b = grid.mid() + 0.5 * plateau;
  std::vector<double> env(grid.n);
  for (int k = 0; k < grid.n; ++k)
    env[k] = flat_top_amplitude(grid.t(k), a, b, edge_fwhm);
  return env;
}

// ---------------------------------------------------------------------------
// Photon pulses
// ---------------------------------------------------------------------------

enum class pulse_shape { gaussian, flat_top };

// A frequency-encoded input pulse: alpha * (gamma1 at omega_l + gamma2 at
// omega_h) under a common envelope. (gamma1, gamma2) is the qubit amplitude
// pair on the (low, high) carrier; |alpha|^2 is the pulse mean photon number.
struct pulse_spec {
  pulse_shape envelope = pulse_shape::gaussian;
  double t_p = 100.0;        // amplitude FWHM (gaussian) or plateau (flat_top)
  double edge_fwhm = 40.0;   // flat-top edge width
  cd gamma1{1.0, 0.0};
  cd gamma2{0.0, 0.0};
  cd alpha{0.0, 0.0};
  double omega_l = 0.0;      // absolute carrier, rad/ns
  double omega_h = 0.0;
  // Pulse center; NaN selects the grid midpoint.
  double center = std::numeric_limits<double>::quiet_NaN();
};

// Closed-form evaluator for a pulse_spec, normalized so that the sampled
// waveform on `grid` carries exactly |alpha|^2 photons. Carrier phases are
// anchored at the pulse center.
class pulse_evaluator {
 public:
  pulse_evaluator() = default;

  pulse_evaluator(const pulse_spec& spec, const time_grid& grid, double frame)
      : spec_(spec), frame_(frame) {
    const double g2 = std::norm(spec.gamma1) + std::norm(spec.gamma2);
    if (std::abs(g2 - 1.0) > 1e-9)
      throw std::invalid_argument("pulse_spec: (gamma1, gamma2) is not normalized");
    center_ = std::isnan(spec.center) ? grid.mid() : spec.center;
    if (spec.envelope == pulse_shape::gaussian) {
      // 2 t_p = 4.7 sigma: truncated power below 1e-9 of the pulse.
      if (center_ - grid.t0 < 2.0 * spec.t_p || grid.t(grid.n - 1) - center_ < 2.0 * spec.t_p)
        throw std::invalid_argument("pulse_spec: grid does not cover +-2 t_p around the pulse");
    } else {
      if (spec.t_p < 2.0 * spec.edge_fwhm)
        throw std::invalid_argument("pulse_spec: flat-top plateau shorter than its edge support");
    }
    const double half_beat = 0.5 * std::abs(spec.omega_h - spec.omega_l);
    if (half_beat > 0.0 && grid.dt > 3.14159265358979323846 / (10.0 * half_beat))
      throw std::invalid_argument("pulse_spec: grid too coarse for the carrier splitting");
    scale_ = 1.0;
    if (std::abs(spec.alpha) > 0.0) {
      double p = 0.0;
      for (int k = 0; k < grid.n; ++k) p += std::norm(raw(grid.t(k)));
      p *= grid.dt;
      if (p <= 0.0) throw std::invalid_argument("pulse_spec: pulse has no support on the grid");
      scale_ = 1.0 / std::sqrt(p / std::norm(spec.alpha));
    }
  }

  double frame() const { return frame_; }
  double center() const { return center_; }

  cd operator()(double t) const { return scale_ * raw(t); }

 private:
  cd raw(double t) const {
    double env;
    if (spec_.envelope == pulse_shape::gaussian) {
      env = gaussian_amplitude(t, center_, spec_.t_p);
    } else {
      env = flat_top_amplitude(t, center_ - 0.5 * spec_.t_p, center_ + 0.5 * spec_.t_p,
                               spec_.edge_fwhm);
    }
    const double dl = spec_.omega_l - frame_;
    const double dh = spec_.omega_h - frame_;
    const cd i(0.0, 1.0);
    const double tau = t - center_;
    return spec_.alpha * env *
           (spec_.gamma1 * std::exp(-i * dl * tau) + spec_.gamma2 * std::exp(-i * dh * tau));
  }

  pulse_spec spec_;
  double frame_ = 0.0;
  double center_ = 0.0;
  double scale_ = 1.0;
};

// Samples the pulse on `grid` in the rotating frame `frame`. The result
// carries exactly |alpha|^2 photons.
inline waveform build_photon_pulse(const pulse_spec& spec, const time_grid& grid, double frame) {
  const pulse_evaluator eval(spec, grid, frame);
  waveform w{grid.t0, grid.dt, frame, std::vector<cd>(grid.n)};
  for (int k = 0; k < grid.n; ++k) w.samples[k] = eval(grid.t(k));
  return w;
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

// Discrete spectrum of a waveform. values[k] sits at the ordinary-frequency
// offset f0 + k * df (GHz) from frame / 2pi; the transform is normalized so
// that sum |values|^2 df equals the waveform power (Parseval).
struct spectrum {
  double f0 = 0.0;   // cycles/ns offset of the first bin
  double df = 0.0;
  double frame = 0.0;
  double t0 = 0.0;
  std::vector<cd> values;
};

// Forward transform with the physics sign convention: a carrier
// exp(-i delta t) peaks at f = +delta / 2pi.
inline spectrum fft_spectrum(const waveform& w) {
  const int n = static_cast<int>(w.samples.size());
  if (n < 2) throw std::invalid_argument("fft_spectrum: waveform too short");
  Eigen::FFT<double> fft;
  std::vector<cd> inv;
  fft.inv(inv, w.samples);  // (1/N) sum x_n exp(+2pi i k n / N)
  spectrum s;
  s.df = 1.0 / (n * w.dt);
  s.f0 = -std::floor(n / 2.0) * s.df;
  s.frame = w.frame;
  s.t0 = w.t0;
  s.values.resize(n);
  const int half = n / 2;
  for (int j = 0; j < n; ++j) {
    const int k_signed = j - half;
    const int k = (k_signed + n) % n;
    s.values[j] = inv[k] * static_cast<double>(n) * w.dt;
  }
  return s;
}

inline waveform fft_inverse(const spectrum& s) {
  const int n = static_cast<int>(s.values.size());
  if (n < 2) throw std::invalid_argument("fft_inverse: spectrum too short");
  std::vector<cd> unshifted(n);
  const int half = n / 2;
  for (int j = 0; j < n; ++j) {
    const int k = ((j - half) + n) % n;
    unshifted[k] = s.values[j];
  }
  Eigen::FFT<double> fft;
  std::vector<cd> fwd;
  fft.fwd(fwd, unshifted);  // sum X_k exp(-2pi i k n / N)
  waveform w;
  w.dt = 1.0 / (n * s.df);
  w.t0 = s.t0;
  w.frame = s.frame;
  w.samples.resize(n);
  for (int j = 0; j < n; ++j) w.samples[j] = fwd[j] * s.df;
  return w;
}

// Spectral power inside [f_lo, f_hi] (offsets from the frame, GHz).
inline double band_power(const spectrum& s, double f_lo, double f_hi) {
  double p = 0.0;
  for (size_t k = 0; k < s.values.size(); ++k) {
    const double f = s.f0 + s.df * static_cast<double>(k);
    if (f >= f_lo && f <= f_hi) p += std::norm(s.values[k]);
  }
  return p * s.df;
}

// ---------------------------------------------------------------------------
// Waveform files
// ---------------------------------------------------------------------------
// Format: one metadata line `dt_ns,frame_rad_per_ns,t0_ns`, its values, a
// column header, then `t_ns,re,im` rows. 17 significant digits round-trip
// doubles exactly.

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_waveform_csv(const std::string& path, const waveform& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_waveform_csv: cannot open " + path);
  out << "dt_ns,frame_rad_per_ns,t0_ns\n";
  out << format_g17(w.dt) << ',' << format_g17(w.frame) << ',' << format_g17(w.t0) << '\n';
  out << "t_ns,re,im\n";
  for (size_t k = 0; k < w.samples.size(); ++k) {
    out << format_g17(w.t0 + w.dt * static_cast<double>(k)) << ','
        << format_g17(w.samples[k].real()) << ',' << format_g17(w.samples[k].imag()) << '\n';
  }
  if (!out) throw std::runtime_error("write_waveform_csv: write failed for " + path);
}

inline waveform read_waveform_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_waveform_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("dt_ns,", 0) != 0)
    throw std::runtime_error("read_waveform_csv: bad metadata header in " + path);
  if (!std::getline(in, line)) throw std::runtime_error("read_waveform_csv: truncated " + path);
  waveform w;
  if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &w.dt, &w.frame, &w.t0) != 3)
    throw std::runtime_error("read_waveform_csv: bad metadata values in " + path);
  if (!std::getline(in, line) || line.rfind("t_ns,", 0) != 0)
    throw std::runtime_error("read_waveform_csv: bad column header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, re, im;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) != 3)
      throw std::runtime_error("read_waveform_csv: bad sample row in " + path);
    w.samples.emplace_back(re, im);
  }
  return w;
}

}  // namespace sprintsim
