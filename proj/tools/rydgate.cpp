// rydgate: scheme tables, π-pulse phase scans, protocol parameters and
// velocity-averaged gate errors for the π–2Nπ–π Rydberg blockade gate.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rydgate/cli.hpp"

#ifndef RYDGATE_DATA_FILE
#define RYDGATE_DATA_FILE "data/species.ini"
#endif

namespace {

struct CommonFlags {
  std::string data_file = RYDGATE_DATA_FILE;
  std::optional<std::string> config;
  std::optional<std::string> species;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--data", flags.data_file, "Atomic level data file")->capture_default_str();
  cmd->add_option("--config", flags.config, "Run configuration file ([run] section)");
  cmd->add_option("--species", flags.species, "Species section in the data file (rb87, cs133)");
  cmd->add_option("--out", flags.out, "Output file (default: stdout)");
  cmd->add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

rydgate::RunConfig resolve(const CommonFlags& flags) {
  rydgate::RunConfig cfg;
  if (flags.config) rydgate::apply_config(cfg, rydgate::load_ini(*flags.config));
  if (flags.species) cfg.species = *flags.species;
  if (flags.out) cfg.out = *flags.out;
  if (flags.format) cfg.format = rydgate::parse_format(*flags.format);
  return cfg;
}

std::string render(const rydgate::Report& report, rydgate::OutputFormat format) {
  std::ostringstream os;
  rydgate::write_report(os, report, format);
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw rydgate::ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw rydgate::ConfigError("write to '" + path + "' failed");
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) std::cout << text;
  else write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Doppler-dephasing-free Rydberg blockade gate toolkit.\n"
      "Frequencies are given as Omega/2pi in MHz and converted to rad/s once on input;\n"
      "C6 coefficients as C6/2pi in THz*um^6. Velocities in m/s, spacing in um."};
  app.require_subcommand(1);

  CommonFlags common;

  auto* scheme = app.add_subcommand("scheme-table", "kw/k for every stored (e1, e2) intermediate-level pair");
  add_common(scheme, common);

  auto* fig2 = app.add_subcommand("fig2-scan", "Population and phase of |r1> after one pi pulse versus drift velocity");
  add_common(fig2, common);
  std::vector<double> fig2_omega{1.0, 0.5, 0.2};
  std::vector<double> fig2_v = rydgate::Fig2Options::default_velocities();
  double fig2_z0 = 0.0;
  std::optional<std::string> fig2_e1;
  fig2->add_option("--omega1", fig2_omega, "Omega1/2pi values, MHz")->delimiter(',')->capture_default_str();
  fig2->add_option("--velocities", fig2_v, "Drift velocities, m/s")->delimiter(',');
  fig2->add_option("--z0", fig2_z0, "Initial coordinate along the beam, m")->capture_default_str();
  fig2->add_option("--e1", fig2_e1, "Intermediate level of the ground-Rydberg drive (default from config: 5P3/2)");

  auto* params = app.add_subcommand("protocol-params", "Derived Rabi frequencies, timings and Doppler diagnostics");
  add_common(params, common);
  std::optional<std::string> schedule_out;
  params->add_option("--schedule-out", schedule_out, "Also write the pulse schedule (17-digit text records)");

  auto* gate = app.add_subcommand("gate-error", "Maxwell-averaged rotation error, decay error and total error");
  add_common(gate, common);
  std::optional<std::vector<double>> temps;
  std::optional<std::string> protocol;
  std::optional<int> grid;
  std::optional<double> vmax;
  std::optional<std::string> cells_dir;
  std::optional<unsigned> workers;
  gate->add_option("--temp-uk", temps, "Temperatures, uK")->delimiter(',');
  gate->add_option("--protocol", protocol, "pipulse, traditional or both")
      ->check(CLI::IsMember({"pipulse", "traditional", "both"}));
  gate->add_option("--grid", grid, "Velocity grid points per axis");
  gate->add_option("--vmax", vmax, "Velocity grid half-width, m/s");
  gate->add_option("--cells-dir", cells_dir, "Directory for per-cell sweep CSVs");
  gate->add_option("--workers", workers, "Worker threads (0: all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto db = rydgate::load_atomic_data(common.data_file);
    auto cfg = resolve(common);

    if (scheme->parsed()) {
      emit(render(rydgate::cmd_scheme_table(db, cfg.species), cfg.format), cfg.out);
    } else if (fig2->parsed()) {
      rydgate::Fig2Options opt{fig2_omega, fig2_v, fig2_z0};
      emit(render(rydgate::cmd_fig2_scan(db, cfg.species, fig2_e1.value_or(cfg.scheme.e1), opt), cfg.format),
           cfg.out);
    } else if (params->parsed()) {
      const auto text = render(rydgate::cmd_protocol_params(db, cfg), cfg.format);
      std::string sched_text;
      if (schedule_out) {
        const auto wp = rydgate::working_point(db, cfg);
        sched_text = rydgate::schedule_to_string(rydgate::build_gate_schedule(wp.params, cfg.n_target));
      }
      emit(text, cfg.out);
      if (schedule_out) write_text(*schedule_out, sched_text);
    } else if (gate->parsed()) {
      if (temps) cfg.temperatures_uk = *temps;
      if (protocol) cfg.protocols = rydgate::parse_protocols(*protocol);
      if (grid) cfg.grid_points = *grid;
      if (vmax) cfg.v_max = *vmax;
      if (cells_dir) cfg.cells_dir = *cells_dir;
      if (workers) cfg.workers = *workers;
      const auto result = rydgate::cmd_gate_error(db, cfg);

      // Render everything before touching the filesystem.
      const auto text = render(result.report, cfg.format);
      std::filesystem::path dir = cfg.cells_dir;
      if (dir.empty() && !cfg.out.empty()) dir = std::filesystem::path(cfg.out).parent_path();
      std::vector<std::pair<std::string, std::string>> files;
      for (const auto& [stem, sweep] : result.cells) {
        std::ostringstream os;
        rydgate::write_sweep_csv(os, sweep);
        files.emplace_back((dir / (stem + ".csv")).string(), os.str());
      }
      if (!dir.empty()) std::filesystem::create_directories(dir);
      for (const auto& [path, body] : files) write_text(path, body);
      emit(text, cfg.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "rydgate: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
