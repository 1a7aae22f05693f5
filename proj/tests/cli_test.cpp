// End-to-end checks of the command line tool: exit codes, file contracts,
// and the reproducibility guarantees of the run records. The binary under
// test comes from SPRINTSIM_CLI; shipped configs from SPRINTSIM_CONFIG_DIR.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sprintsim/config.hpp"
#include "sprintsim/qmath.hpp"

using namespace sprintsim;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
  const char* env = std::getenv("SPRINTSIM_CLI");
  REQUIRE(env != nullptr);
  return env;
}

std::string shipped_config(const std::string& name) {
  const char* env = std::getenv("SPRINTSIM_CONFIG_DIR");
  REQUIRE(env != nullptr);
  return (fs::path(env) / name).string();
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

fs::path scratch(const std::string& sub) {
  const fs::path base = fs::current_path() / "cli_test_runs";
  fs::create_directories(base);
  const fs::path p = base / sub;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

// A fast strongly-detuned gate: short pulse, stiff-but-small time step, two
// photon numbers. Keeps each battery invocation near a second.
std::string fast_config(const std::string& noise_block, const std::string& tomo_block) {
  return "[system]\n"
         "omega_r_ghz = 10.258\n"
         "omega_ge_ghz = 5.839\n"
         "two_chi_ghz = 2.32\n"
         "kappa_ghz = 0.15\n"
         "[drive]\n"
         "mode = auto\n"
         "rabi_ghz = 0.514\n"
         "omega_d_ghz = 3.639\n"
         "[pulse]\n"
         "envelope = gaussian\n"
         "t_p_ns = 40\n"
         "edge_fwhm_ns = 40\n"
         "[noise]\n" +
         noise_block +
         "[tomo]\n" +
         tomo_block +
         "[run]\n"
         "dt_ns = 0.02\n"
         "pre_margin_ns = 10\n"
         "post_margin_ns = 10\n"
         "tail_ns = 10\n"
         "drive_edge_fwhm_ns = 10\n"
         "[battery]\n"
         "alpha_sq = 0, 0.004\n"
         "theta_count = 5\n";
}

std::string noisy_config() {
  return fast_config("t1_ns = 900\nt_phi_ns = 380\n", "wait_ns = 15\nreadout_ns = 20\n");
}

std::string ideal_config() { return fast_config("", ""); }

std::string sampled_config() {
  return fast_config(
      "t1_ns = 900\nt_phi_ns = 380\nread_fid_g = 0.98\nread_fid_e = 0.95\n",
      "wait_ns = 15\nreadout_ns = 20\nshots = 200\n");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("match emits the matched point within the stored tolerances", "[cli]") {
  const fs::path dir = scratch("match");
  const fs::path out = dir / "run";
  REQUIRE(run_cli("match --config " + shipped_config("photon_to_atom.cfg") + " --out " +
                  out.string()) == 0);

  const json matched = read_json(out / "matched.json");
  REQUIRE(matched["converged"].get<bool>());
  REQUIRE(matched["omega_l_ghz"].get<double>() == Approx(10.208).margin(0.01));
  REQUIRE(matched["omega_h_ghz"].get<double>() == Approx(10.266).margin(0.01));
  const double kappa = matched["kappa_ghz"].get<double>();
  for (const char* key : {"gamma41", "gamma42", "gamma31", "gamma32"})
    REQUIRE(matched["rates_ghz"][key].get<double>() ==
            Approx(0.5 * kappa).margin(0.01 * kappa));

  const auto surface = read_csv(out / "rate_surface.csv");
  REQUIRE(surface.size() == 1 + 21 * 21);
  REQUIRE(surface.front().size() == 7);
  REQUIRE(surface.front().front() == "rabi_ghz");
  REQUIRE(surface.back().size() == 7);

  const json record = read_json(out / "record.json");
  REQUIRE(record["command"].get<std::string>() == "match");
  for (const auto& name : record["outputs"]) REQUIRE(fs::exists(out / name.get<std::string>()));
}

TEST_CASE("config and convergence failures use distinct exit codes", "[cli]") {
  const fs::path dir = scratch("exit_codes");

  SECTION("missing config file is a config error") {
    REQUIRE(run_cli("p2a --config " + (dir / "absent.cfg").string() + " --out " +
                    (dir / "x").string()) == 2);
  }

  SECTION("unknown keys are rejected as config errors") {
    write_file(dir / "bad.cfg", "[system]\nbogus_key = 1\n");
    REQUIRE(run_cli("match --config " + (dir / "bad.cfg").string() + " --out " +
                    (dir / "x").string()) == 2);
  }

  SECTION("domain validation failures are config errors") {
    std::string text = noisy_config();
    const auto pos = text.find("two_chi_ghz = 2.32");
    text.replace(pos, 18, "two_chi_ghz = 0");
    write_file(dir / "chi0.cfg", text);
    REQUIRE(run_cli("levels --config " + (dir / "chi0.cfg").string() + " --out " +
                    (dir / "x").string()) == 2);
  }

  SECTION("an unmatchable device reports convergence failure") {
    // Hairline matching window far from the seeded drive frequency: the
    // optimizer sees a flat landscape and must give up.
    std::string text = slurp(shipped_config("photon_to_atom.cfg"));
    text.replace(text.find("two_chi_ghz = 0.073"), 19, "two_chi_ghz = 1e-6");
    text.replace(text.find("omega_d_ghz = 5.785"), 19, "omega_d_ghz = 4.0");
    write_file(dir / "nomatch.cfg", text);
    REQUIRE(run_cli("match --config " + (dir / "nomatch.cfg").string() + " --out " +
                    (dir / "x").string()) == 3);
    REQUIRE(run_cli("p2a --config " + (dir / "nomatch.cfg").string() + " --out " +
                    (dir / "y").string()) == 3);
  }
}

TEST_CASE("battery outputs reproduce bit-identically", "[cli]") {
  const fs::path dir = scratch("reproducibility");
  write_file(dir / "sampled.cfg", sampled_config());

  const fs::path r1 = dir / "r1";
  const fs::path r2 = dir / "r2";
  REQUIRE(run_cli("p2a --config " + (dir / "sampled.cfg").string() + " --out " + r1.string() +
                  " --seed 42 --threads 4") == 0);
  REQUIRE(run_cli("p2a --config " + (dir / "sampled.cfg").string() + " --out " + r2.string() +
                  " --seed 42 --threads 1") == 0);

  const json record = read_json(r1 / "record.json");

  SECTION("across thread counts") {
    for (const auto& name : record["outputs"]) {
      const std::string n = name.get<std::string>();
      REQUIRE(slurp(r1 / n) == slurp(r2 / n));
    }
  }

  SECTION("from the embedded config snapshot") {
    write_file(dir / "replay.cfg", record["config_text"].get<std::string>());
    const fs::path r3 = dir / "r3";
    REQUIRE(run_cli("p2a --config " + (dir / "replay.cfg").string() + " --out " + r3.string() +
                    " --seed 42 --threads 2") == 0);
    for (const auto& name : record["outputs"]) {
      const std::string n = name.get<std::string>();
      REQUIRE(slurp(r1 / n) == slurp(r3 / n));
    }
  }

  SECTION("a different seed changes the sampled records") {
    const fs::path r4 = dir / "r4";
    REQUIRE(run_cli("p2a --config " + (dir / "sampled.cfg").string() + " --out " + r4.string() +
                    " --seed 43 --threads 4") == 0);
    REQUIRE(slurp(r1 / "records_wl.csv") != slurp(r4 / "records_wl.csv"));
  }

  SECTION("the embedded snapshot is the canonical serialization") {
    const std::string text = record["config_text"].get<std::string>();
    REQUIRE(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("estimate reproduces the battery's own record files", "[cli]") {
  const fs::path dir = scratch("estimate");
  write_file(dir / "noisy.cfg", noisy_config());

  const fs::path battery = dir / "battery";
  REQUIRE(run_cli("p2a --config " + (dir / "noisy.cfg").string() + " --out " +
                  battery.string() + " --seed 7 --threads 4") == 0);
  const json record = read_json(battery / "record.json");
  const double battery_fid =
      record["results"]["cardinals"]["wl"]["fidelity"].get<double>();

  SECTION("slope pipeline on the emitted records matches the battery fidelity") {
    // The low-carrier input transfers to the ground state; its fidelity has
    // no coherence, so the measurement-frame estimate is phase-free.
    const fs::path est = dir / "est";
    REQUIRE(run_cli("estimate " + (battery / "records_wl.csv").string() +
                    " --target g --out " + est.string()) == 0);
    const json report = read_json(est / "estimate.json");
    REQUIRE(report["mode"].get<std::string>() == "records");
    const json& entry = report["files"][0];
    REQUIRE(entry["slope_estimate"]["target_fidelity"].get<double>() ==
            Approx(battery_fid).margin(1e-12));
  }

  SECTION("a single record row yields its bloch vector and no slope estimate") {
    write_file(dir / "single.csv",
               "alpha_sq,theta_rad,p1,p2,p3,p4,p5,p6\n"
               "0,0,0.0371,0.9226,0.4953,0.4965,0.4812,0.4821\n");
    const fs::path est = dir / "single";
    REQUIRE(run_cli("estimate " + (dir / "single.csv").string() + " --out " + est.string()) ==
            0);
    const json report = read_json(est / "estimate.json");
    const json& row = report["files"][0]["rows"][0];
    REQUIRE(row["bloch"][0].get<double>() == Approx(0.0141).margin(1e-4));
    REQUIRE(row["bloch"][1].get<double>() == Approx(0.0144).margin(1e-4));
    REQUIRE(row["bloch"][2].get<double>() == Approx(-0.8855).margin(1e-4));
    REQUIRE(!report["files"][0].contains("slope_estimate"));
  }

  SECTION("unreadable record files are config errors") {
    REQUIRE(run_cli("estimate " + (dir / "missing.csv").string() + " --out " +
                    (dir / "x").string()) == 2);
  }
}

TEST_CASE("ground-state emission leaves the high band empty without noise", "[cli]") {
  const fs::path dir = scratch("band");
  write_file(dir / "ideal.cfg", ideal_config());

  const fs::path out = dir / "run";
  REQUIRE(run_cli("a2p --config " + (dir / "ideal.cfg").string() + " --out " + out.string() +
                  " --threads 4") == 0);
  const json record = read_json(out / "record.json");
  const double omega_l = record["results"]["omega_l_ghz"].get<double>();
  const double omega_h = record["results"]["omega_h_ghz"].get<double>();
  const double half_band = 0.25 * (omega_h - omega_l);

  // Ground-state atom driven by the high carrier: the pulse is absorbed and
  // the converted emission rides on the atom flip, so the mean-field output
  // nearly vanishes. The excited atom reflects the same pulse elastically and
  // serves as the injected-power reference.
  auto band_powers = [&](const std::string& name) {
    const auto rows = read_csv(out / name);
    REQUIRE(rows.front().front() == "f_offset_ghz");
    double total = 0.0, high = 0.0;
    for (size_t k = 1; k < rows.size(); ++k) {
      const double f_abs = std::stod(rows[k][1]);
      const double p = std::stod(rows[k][4]);
      total += p;
      if (std::abs(f_abs - omega_h) < half_band) high += p;
    }
    return std::pair<double, double>(total, high);
  };
  const auto [converted_total, converted_high] = band_powers("spectrum_g_h.csv");
  const auto [reflected_total, reflected_high] = band_powers("spectrum_e_h.csv");
  REQUIRE(reflected_total > 0.0);
  REQUIRE(converted_high / reflected_total < 0.05);
  REQUIRE(converted_total / reflected_total < 0.05);
  REQUIRE(reflected_high / reflected_total > 0.90);

  // The matching emission waveform is a valid round-trippable file.
  REQUIRE(fs::exists(out / "emission_g_h.csv"));

  for (const auto& [label, card] : record["results"]["cardinals"].items()) {
    const double fid = card["fidelity"].get<double>();
    REQUIRE(fid >= 0.0);
    REQUIRE(fid <= 1.0);
  }
}

TEST_CASE("run directories carry a self-contained manifest", "[cli]") {
  const fs::path dir = scratch("manifest");
  write_file(dir / "noisy.cfg", noisy_config());

  const fs::path out = dir / "run";
  REQUIRE(run_cli("p2a --config " + (dir / "noisy.cfg").string() + " --out " + out.string() +
                  " --seed 5 --threads 4") == 0);
  const json record = read_json(out / "record.json");

  for (const char* key : {"command", "version", "seed", "threads", "config_text",
                          "timings_ms", "outputs", "results"})
    REQUIRE(record.contains(key));
  REQUIRE(record["command"].get<std::string>() == "p2a");
  REQUIRE(!record["version"].get<std::string>().empty());

  for (const auto& name : record["outputs"]) REQUIRE(fs::exists(out / name.get<std::string>()));

  const double avg = record["results"]["average_fidelity"].get<double>();
  REQUIRE(avg >= 0.0);
  REQUIRE(avg <= 1.0);
  for (const auto& [label, card] : record["results"]["cardinals"].items()) {
    const double fid = card["fidelity"].get<double>();
    REQUIRE(fid >= 0.0);
    REQUIRE(fid <= 1.0);
  }

  // Every fidelity column in the emitted tables stays inside [0, 1].
  const auto cardinals = read_csv(out / "cardinals.csv");
  for (size_t k = 1; k < cardinals.size(); ++k) {
    const double fid = std::stod(cardinals[k][1]);
    REQUIRE(fid >= 0.0);
    REQUIRE(fid <= 1.0);
  }
}
