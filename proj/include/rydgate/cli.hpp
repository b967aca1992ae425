#pragma once

// Run configuration and the report-producing commands behind the `rydgate`
// executable. Commands build complete Reports in memory; nothing is written
// until every requested computation has finished.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rydgate/analytics.hpp"
#include "rydgate/atomdata.hpp"
#include "rydgate/constants.hpp"
#include "rydgate/dynamics.hpp"
#include "rydgate/error.hpp"
#include "rydgate/ini.hpp"
#include "rydgate/numfmt.hpp"
#include "rydgate/report.hpp"
#include "rydgate/schedule.hpp"

namespace rydgate {

struct RunConfig {
  std::string species = "rb87";
  SchemeSelection scheme{"5P3/2", "6P1/2"};
  double omega1_mhz = 1.35;  // Ω1/2π
  double kw_over_k = 0.0;    // > 0 replaces the ratio computed from level data
  int n_control = 2;
  int n_target = 2;
  std::vector<double> temperatures_uk{10.0, 100.0, 200.0};
  int grid_points = 100;
  double v_max = 0.5;  // m/s
  double spacing_um = default_spacing_um;
  std::array<double, 3> c6_thz{default_c6_11_thz, default_c6_12_thz, default_c6_22_thz};  // C6/2π
  std::vector<Protocol> protocols{Protocol::pipulse, Protocol::traditional};
  std::vector<double> lifetimes_ms{rydberg_lifetime_4k * 1e3, rydberg_lifetime_300k * 1e3};
  unsigned workers = 0;
  OutputFormat format = OutputFormat::csv;
  std::string out;        // empty: stdout
  std::string cells_dir;  // per-cell sweep CSVs; empty: next to `out`, else cwd

  void validate() const {
    if (!(omega1_mhz > 0.0)) throw ConfigError("omega1 must be positive");
    if (!(kw_over_k >= 0.0)) throw ConfigError("kw_over_k must be positive (or 0 for the level data)");
    if (n_control < 1) throw ConfigError("n_control must be >= 1");
    if (n_target < 2 || n_target % 2) throw ConfigError("n_target must be even and >= 2");
    if (temperatures_uk.empty()) throw ConfigError("temperature list is empty");
    for (double t : temperatures_uk)
      if (!(t > 0.0)) throw ConfigError("temperatures must be positive");
    if (grid_points < 1) throw ConfigError("grid_points must be >= 1");
    if (!(v_max >= 0.0)) throw ConfigError("v_max must be non-negative");
    if (!(spacing_um > 0.0)) throw ConfigError("spacing must be positive");
    for (double c : c6_thz)
      if (!(c > 0.0)) throw ConfigError("C6 coefficients must be positive");
    if (protocols.empty()) throw ConfigError("no protocol selected");
    if (lifetimes_ms.empty()) throw ConfigError("no lifetime given");
    for (double t : lifetimes_ms)
      if (!(t > 0.0)) throw ConfigError("lifetimes must be positive");
  }

  InteractionSet interactions() const {
    return vdw_interactions(C6Coefficients::from_thz(c6_thz[0], c6_thz[1], c6_thz[2]), spacing_um);
  }
};

inline std::vector<Protocol> parse_protocols(const std::string& text) {
  if (trim(text) == "both") return {Protocol::pipulse, Protocol::traditional};
  std::vector<Protocol> out;
  for (const auto& p : split_list(text)) out.push_back(parse_protocol(p));
  return out;
}

/// Applies the [run] section of a config file on top of `cfg`.
inline void apply_config(RunConfig& cfg, const IniDocument& doc) {
  const auto* run = doc.find("run");
  if (!run) throw ConfigError("config file needs a [run] section");
  for (const auto& [key, value] : run->entries) {
    if (key == "species") cfg.species = value;
    else if (key == "e1") cfg.scheme.e1 = value;
    else if (key == "e2") cfg.scheme.e2 = value;
    else if (key == "omega1_mhz") cfg.omega1_mhz = parse_double(value);
    else if (key == "kw_over_k") cfg.kw_over_k = parse_double(value);
    else if (key == "n_control") cfg.n_control = static_cast<int>(parse_long(value));
    else if (key == "n_target") cfg.n_target = static_cast<int>(parse_long(value));
    else if (key == "temperatures_uk") cfg.temperatures_uk = parse_double_list(value);
    else if (key == "grid_points") cfg.grid_points = static_cast<int>(parse_long(value));
    else if (key == "v_max") cfg.v_max = parse_double(value);
    else if (key == "spacing_um") cfg.spacing_um = parse_double(value);
    else if (key == "c6_thz") {
      const auto c = parse_double_list(value);
      if (c.size() != 3) throw ConfigError("c6_thz needs three values");
      cfg.c6_thz = {c[0], c[1], c[2]};
    } else if (key == "protocol") cfg.protocols = parse_protocols(value);
    else if (key == "lifetimes_ms") cfg.lifetimes_ms = parse_double_list(value);
    else if (key == "workers") cfg.workers = static_cast<unsigned>(parse_long(value));
    else if (key == "format") cfg.format = parse_format(value);
    else if (key == "out") cfg.out = value;
    else if (key == "cells_dir") cfg.cells_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Gate parameters derived from a run configuration.
struct WorkingPoint {
  const SpeciesLevels* levels = nullptr;
  WavevectorPair wavevectors;
  ProtocolParams params;
  GateTiming timing;
  TargetRabi target;
};

inline WorkingPoint working_point(const AtomicDatabase& db, const RunConfig& cfg) {
  WorkingPoint wp;
  wp.levels = &db.at(cfg.species);
  wp.wavevectors = compute_wavevectors(*wp.levels, cfg.scheme);
  if (cfg.kw_over_k > 0.0) wp.wavevectors.kw = cfg.kw_over_k * wp.wavevectors.k;
  wp.params = solve_condition(mhz_to_rad_per_s(cfg.omega1_mhz), cfg.n_control, wp.wavevectors.k, wp.wavevectors.kw);
  wp.timing = gate_time(wp.params);
  wp.target = derive_target_rabi(wp.params, cfg.n_target);
  return wp;
}

inline std::string ratio_source(const RunConfig& cfg) { return cfg.kw_over_k > 0.0 ? "config" : "level data"; }

inline GateSchedule schedule_for(const WorkingPoint& wp, const RunConfig& cfg, Protocol protocol) {
  if (protocol == Protocol::pipulse) return build_gate_schedule(wp.params, cfg.n_target);
  return build_traditional_schedule(wp.params.omega1, wp.timing.t_wait, wp.params.k);
}

inline InteractionSet interactions_for(const RunConfig& cfg, Protocol protocol) {
  const auto set = cfg.interactions();
  return protocol == Protocol::pipulse ? set : comparator_interactions(set);
}

// Commands ---------------------------------------------------------------------

inline Report cmd_scheme_table(const AtomicDatabase& db, const std::string& species) {
  const auto& levels = db.at(species);
  Report r{"scheme-table", {{"species", levels.display_name}}, {}};
  Table t{"schemes",
          {{"e1", "-"}, {"e2", "-"}, {"k", "rad/m"}, {"kw", "rad/m"}, {"kw_over_k", "1"}, {"feasible", "-"}},
          {}};
  for (const auto& row : scheme_table(levels)) {
    t.add(levels.display_name, {row.scheme.e1, row.scheme.e2, row.wavevectors.k, row.wavevectors.kw, row.ratio,
                                std::string(row.feasible ? "yes" : "no")});
  }
  r.tables.push_back(std::move(t));
  return r;
}

struct Fig2Options {
  std::vector<double> omega1_mhz{1.0, 0.5, 0.2};
  std::vector<double> velocities;  // m/s
  double z0 = 0.0;                 // m

  static std::vector<double> default_velocities() {
    std::vector<double> v;
    for (int i = 1; i <= 20; ++i) v.push_back(0.01 * i);
    return v;
  }
};

/// One π pulse on |g> -> |r1> per (Ω1, v), integrated with the fixed-step
/// stepper. The phase column is arg<r1|ψ(t_π)> + π/2 − k z0, unwrapped
/// against the k v t_π/2 prediction.
inline Report cmd_fig2_scan(const AtomicDatabase& db, const std::string& species, const std::string& e1,
                            const Fig2Options& opt) {
  const auto& levels = db.at(species);
  const double k = compute_k(levels, {e1, e1});
  Report r{"fig2-scan",
           {{"species", levels.display_name}, {"e1", e1}, {"k_rad_per_m", format_g17(k)}, {"z0_m", format_g17(opt.z0)}},
           {}};
  Table t{"pi_pulse",
          {{"omega1_over_2pi", "MHz"},
           {"v", "m/s"},
           {"kv_over_omega1", "1"},
           {"population", "1"},
           {"population_closed_form", "1"},
           {"phase", "rad"},
           {"phase_predicted", "rad"}},
          {}};
  const IntegratorConfig rk4{};
  for (double f : opt.omega1_mhz) {
    if (!(f > 0.0)) throw ConfigError("omega1 must be positive");
    const double omega = mhz_to_rad_per_s(f);
    const auto seg = make_segment(Atom::control, Transition::ground_r1, omega, k, 0.0, pi);
    for (double v : opt.velocities) {
      const auto model = single_atom_model({seg}, Atom::control, {opt.z0, v});
      const auto psi = evolve(model, StateVector::basis_state(BasisKind::single_atom, 0), 0.0, seg.duration, rk4);
      const cplx amp = psi.amplitudes(static_cast<int>(Level::r1));
      const double predicted = 0.5 * k * v * seg.duration;
      const double measured = std::arg(amp) + 0.5 * pi - k * opt.z0;
      const double phase = predicted + wrap_phase(measured - predicted);
      t.add(levels.display_name, {f, v, k * v / omega, std::norm(amp), rabi_population(omega, k * v, seg.duration),
                                  phase, predicted});
    }
  }
  r.tables.push_back(std::move(t));
  return r;
}

inline Report cmd_protocol_params(const AtomicDatabase& db, const RunConfig& cfg) {
  cfg.validate();
  const auto wp = working_point(db, cfg);
  Report r{"protocol-params",
           {{"species", wp.levels->display_name}, {"e1", cfg.scheme.e1}, {"e2", cfg.scheme.e2},
            {"n_control", std::to_string(cfg.n_control)}, {"n_target", std::to_string(cfg.n_target)},
            {"kw_over_k_source", ratio_source(cfg)}},
           {}};
  Table p{"parameters",
          {{"k", "rad/m"},
           {"kw", "rad/m"},
           {"kw_over_k", "1"},
           {"omega1_over_2pi", "MHz"},
           {"omega2_over_2pi", "MHz"},
           {"omega1_prime_over_2pi", "MHz"},
           {"omega2_prime_over_2pi", "MHz"},
           {"t_pi", "us"},
           {"t_wait", "us"},
           {"t_gate", "us"}},
          {}};
  p.add("pipulse", {wp.params.k, wp.params.kw, wp.params.ratio(), rad_per_s_to_mhz(wp.params.omega1),
                    rad_per_s_to_mhz(wp.params.omega2), rad_per_s_to_mhz(wp.target.omega1_prime),
                    rad_per_s_to_mhz(wp.target.omega2_prime), wp.timing.t_pi * 1e6, wp.timing.t_wait * 1e6,
                    wp.timing.t_gate * 1e6});
  Table d{"diagnostics",
          {{"temperature", "uK"}, {"v_rms", "m/s"}, {"k_vrms_over_omega1", "1"}, {"kw_vrms_over_omega2", "1"}},
          {}};
  for (double t_uk : cfg.temperatures_uk) {
    const ThermalEnsemble ens{t_uk * 1e-6, wp.levels->atomic_mass, cfg.grid_points, cfg.v_max};
    const double vr = ens.v_rms();
    d.add("pipulse", {t_uk, vr, wp.params.k * vr / wp.params.omega1, wp.params.kw * vr / wp.params.omega2});
  }
  r.tables.push_back(std::move(p));
  r.tables.push_back(std::move(d));
  return r;
}

struct GateErrorOutput {
  Report report;
  std::vector<std::pair<std::string, SweepResult>> cells;  // file stem -> sweep
};

inline std::string cells_stem(Protocol protocol, double t_uk) {
  return "gate_error_cells_" + std::string(to_string(protocol)) + "_" + format_short(t_uk) + "uK";
}

inline GateErrorOutput cmd_gate_error(const AtomicDatabase& db, const RunConfig& cfg) {
  cfg.validate();
  const auto wp = working_point(db, cfg);
  IntegratorConfig exact;
  exact.method = IntegratorMethod::exact;

  GateErrorOutput out;
  auto& r = out.report;
  r.command = "gate-error";
  r.metadata = {{"species", wp.levels->display_name},
                {"e1", cfg.scheme.e1},
                {"e2", cfg.scheme.e2},
                {"kw_over_k", format_g17(wp.params.ratio())},
                {"kw_over_k_source", ratio_source(cfg)},
                {"omega1_over_2pi_MHz", format_g17(cfg.omega1_mhz)},
                {"grid_points", std::to_string(cfg.grid_points)},
                {"v_max_m_per_s", format_g17(cfg.v_max)},
                {"spacing_um", format_g17(cfg.spacing_um)}};
  std::vector<Column> cols{{"protocol", "-"},   {"temperature", "uK"}, {"mean_e_ro", "1"},
                           {"e_ro_at_rest", "1"}, {"residence_01", "us"}, {"residence_10", "us"},
                           {"residence_11", "us"}};
  for (double tau : cfg.lifetimes_ms) cols.push_back({"e_decay_tau_" + format_short(tau) + "ms", "1"});
  for (double tau : cfg.lifetimes_ms) cols.push_back({"e_total_tau_" + format_short(tau) + "ms", "1"});
  Table t{"gate_error", cols, {}};

  const auto velocities = velocity_grid(cfg.grid_points, cfg.v_max);
  for (Protocol protocol : cfg.protocols) {
    const auto schedule = schedule_for(wp, cfg, protocol);
    const auto interactions = interactions_for(cfg, protocol);
    const auto at_rest = run_gate(schedule, {}, {}, interactions, exact);
    const auto grid = rotation_error_grid(schedule, velocities, interactions, exact, 0.0, 0.0, cfg.workers);
    for (double t_uk : cfg.temperatures_uk) {
      const ThermalEnsemble ens{t_uk * 1e-6, wp.levels->atomic_mass, cfg.grid_points, cfg.v_max};
      auto sweep = average_over(grid, ens, protocol);
      std::vector<Cell> row{std::string(to_string(protocol)), t_uk, sweep.mean_e_ro, at_rest.e_ro,
                            at_rest.residence.t01 * 1e6, at_rest.residence.t10 * 1e6, at_rest.residence.t11 * 1e6};
      for (double tau : cfg.lifetimes_ms) row.emplace_back(decay_error(at_rest.residence, tau * 1e-3));
      for (double tau : cfg.lifetimes_ms) row.emplace_back(sweep.mean_e_ro + decay_error(at_rest.residence, tau * 1e-3));
      t.add(std::string(to_string(protocol)), std::move(row));
      out.cells.emplace_back(cells_stem(protocol, t_uk), std::move(sweep));
    }
  }
  r.tables.push_back(std::move(t));
  return out;
}

}  // namespace rydgate
