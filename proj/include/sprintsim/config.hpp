#pragma once

// Experiment configuration: a flat key = value text format with [section]
// headers. Units are part of the key names (GHz for frequencies, ns for
// times) and stored verbatim, so parse -> serialize -> parse is the
// identity; conversion to simulation units happens in the to_* accessors.

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sprintsim/estimation.hpp"

namespace sprintsim {

// Malformed or unknown configuration input; the CLI maps this to exit 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct experiment_config {
  // [system]
  double omega_r_ghz = 0.0;
  double omega_ge_ghz = 0.0;
  double two_chi_ghz = 0.0;
  double kappa_ghz = 0.0;

  // [drive] mode auto: rabi/omega_d seed the impedance-match search.
  std::string drive_mode = "auto";
  double rabi_ghz = 0.0;
  double omega_d_ghz = 0.0;

  // [pulse]
  std::string envelope = "gaussian";
  double t_p_ns = 100.0;
  double edge_fwhm_ns = 40.0;

  // [noise]
  double t1_ns = std::numeric_limits<double>::infinity();
  double t_phi_ns = std::numeric_limits<double>::infinity();
  double read_fid_g = 1.0;
  double read_fid_e = 1.0;

  // [tomo]
  double wait_ns = 0.0;
  double readout_ns = 0.0;
  long shots = 0;

  // [run]
  double dt_ns = 0.125;
  double pre_margin_ns = 100.0;
  double post_margin_ns = 100.0;
  double tail_ns = 300.0;
  double drive_edge_fwhm_ns = 40.0;

  // [battery]
  std::vector<double> alpha_sq = {0.0, 0.025, 0.05};
  int theta_count = 17;

  system_params to_system() const {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    system_params p;
    p.omega_r = two_pi * omega_r_ghz;
    p.omega_ge = two_pi * omega_ge_ghz;
    p.chi = 0.5 * two_pi * two_chi_ghz;
    p.kappa = two_pi * kappa_ghz;
    p.t1_atom = t1_ns;
    p.t_phi = t_phi_ns;
    return p;
  }

  drive_params drive_guess() const {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    return {two_pi * omega_d_ghz, two_pi * rabi_ghz};
  }

  bool drive_auto() const { return drive_mode == "auto"; }

  noise_params to_noise() const {
    noise_params n;
    n.t1 = t1_ns;
    n.t_phi = t_phi_ns;
    n.read_fid_g = read_fid_g;
    n.read_fid_e = read_fid_e;
    return n;
  }

  tomo_settings to_tomo() const { return {wait_ns, readout_ns, static_cast<int>(shots)}; }

  swap_settings to_swap() const {
    swap_settings s;
    s.dt = dt_ns;
    s.t_p = t_p_ns;
    s.envelope = envelope == "flat_top" ? pulse_shape::flat_top : pulse_shape::gaussian;
    s.pulse_edge_fwhm = edge_fwhm_ns;
    s.drive_edge_fwhm = drive_edge_fwhm_ns;
    s.pre_margin = pre_margin_ns;
    s.post_margin = post_margin_ns;
    s.tail = tail_ns;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw config_error("config: bad number for " + key + ": '" + value + "'");
  return x;
}

inline long parse_long(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw config_error("config: bad integer for " + key + ": '" + value + "'");
  return x;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw config_error("config: empty list for " + key);
  return out;
}

}  // namespace detail

inline experiment_config parse_config(const std::string& text) {
  experiment_config cfg;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw config_error("config: unterminated section at line " +
                                              std::to_string(line_no));
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "system" && section != "drive" && section != "pulse" &&
          section != "noise" && section != "tomo" && section != "run" &&
          section != "battery")
        throw config_error("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "system.omega_r_ghz") cfg.omega_r_ghz = detail::parse_double(qual, value);
    else if (qual == "system.omega_ge_ghz") cfg.omega_ge_ghz = detail::parse_double(qual, value);
    else if (qual == "system.two_chi_ghz") cfg.two_chi_ghz = detail::parse_double(qual, value);
    else if (qual == "system.kappa_ghz") cfg.kappa_ghz = detail::parse_double(qual, value);
    else if (qual == "drive.mode") {
      if (value != "auto" && value != "manual")
        throw config_error("config: drive.mode must be auto or manual, got '" + value + "'");
      cfg.drive_mode = value;
    } else if (qual == "drive.rabi_ghz") cfg.rabi_ghz = detail::parse_double(qual, value);
    else if (qual == "drive.omega_d_ghz") cfg.omega_d_ghz = detail::parse_double(qual, value);
    else if (qual == "pulse.envelope") {
      if (value != "gaussian" && value != "flat_top")
        throw config_error("config: pulse.envelope must be gaussian or flat_top, got '" +
                           value + "'");
      cfg.envelope = value;
    } else if (qual == "pulse.t_p_ns") cfg.t_p_ns = detail::parse_double(qual, value);
    else if (qual == "pulse.edge_fwhm_ns") cfg.edge_fwhm_ns = detail::parse_double(qual, value);
    else if (qual == "noise.t1_ns") cfg.t1_ns = detail::parse_double(qual, value);
    else if (qual == "noise.t_phi_ns") cfg.t_phi_ns = detail::parse_double(qual, value);
    else if (qual == "noise.read_fid_g") cfg.read_fid_g = detail::parse_double(qual, value);
    else if (qual == "noise.read_fid_e") cfg.read_fid_e = detail::parse_double(qual, value);
    else if (qual == "tomo.wait_ns") cfg.wait_ns = detail::parse_double(qual, value);
    else if (qual == "tomo.readout_ns") cfg.readout_ns = detail::parse_double(qual, value);
    else if (qual == "tomo.shots") cfg.shots = detail::parse_long(qual, value);
    else if (qual == "run.dt_ns") cfg.dt_ns = detail::parse_double(qual, value);
    else if (qual == "run.pre_margin_ns") cfg.pre_margin_ns = detail::parse_double(qual, value);
    else if (qual == "run.post_margin_ns") cfg.post_margin_ns = detail::parse_double(qual, value);
    else if (qual == "run.tail_ns") cfg.tail_ns = detail::parse_double(qual, value);
    else if (qual == "run.drive_edge_fwhm_ns")
      cfg.drive_edge_fwhm_ns = detail::parse_double(qual, value);
    else if (qual == "battery.alpha_sq") cfg.alpha_sq = detail::parse_list(qual, value);
    else if (qual == "battery.theta_count")
      cfg.theta_count = static_cast<int>(detail::parse_long(qual, value));
    else throw config_error("config: unknown key " + qual);
  }
  return cfg;
}

inline std::string serialize_config(const experiment_config& cfg) {
  std::ostringstream out;
  out << "[system]\n";
  out << "omega_r_ghz = " << format_g17(cfg.omega_r_ghz) << "\n";
  out << "omega_ge_ghz = " << format_g17(cfg.omega_ge_ghz) << "\n";
  out << "two_chi_ghz = " << format_g17(cfg.two_chi_ghz) << "\n";
  out << "kappa_ghz = " << format_g17(cfg.kappa_ghz) << "\n";
  out << "\n[drive]\n";
  out << "mode = " << cfg.drive_mode << "\n";
  out << "rabi_ghz = " << format_g17(cfg.rabi_ghz) << "\n";
  out << "omega_d_ghz = " << format_g17(cfg.omega_d_ghz) << "\n";
  out << "\n[pulse]\n";
  out << "envelope = " << cfg.envelope << "\n";
  out << "t_p_ns = " << format_g17(cfg.t_p_ns) << "\n";
  out << "edge_fwhm_ns = " << format_g17(cfg.edge_fwhm_ns) << "\n";
  out << "\n[noise]\n";
  out << "t1_ns = " << format_g17(cfg.t1_ns) << "\n";
  out << "t_phi_ns = " << format_g17(cfg.t_phi_ns) << "\n";
  out << "read_fid_g = " << format_g17(cfg.read_fid_g) << "\n";
  out << "read_fid_e = " << format_g17(cfg.read_fid_e) << "\n";
  out << "\n[tomo]\n";
  out << "wait_ns = " << format_g17(cfg.wait_ns) << "\n";
  out << "readout_ns = " << format_g17(cfg.readout_ns) << "\n";
  out << "shots = " << cfg.shots << "\n";
  out << "\n[run]\n";
  out << "dt_ns = " << format_g17(cfg.dt_ns) << "\n";
  out << "pre_margin_ns = " << format_g17(cfg.pre_margin_ns) << "\n";
  out << "post_margin_ns = " << format_g17(cfg.post_margin_ns) << "\n";
  out << "tail_ns = " << format_g17(cfg.tail_ns) << "\n";
  out << "drive_edge_fwhm_ns = " << format_g17(cfg.drive_edge_fwhm_ns) << "\n";
  out << "\n[battery]\n";
  out << "alpha_sq = ";
  for (size_t k = 0; k < cfg.alpha_sq.size(); ++k)
    out << (k ? "," : "") << format_g17(cfg.alpha_sq[k]);
  out << "\n";
  out << "theta_count = " << cfg.theta_count << "\n";
  return out.str();
}

inline experiment_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace sprintsim
