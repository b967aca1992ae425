#pragma once

// Species level data, effective two-photon wavevectors, van der Waals shifts
// and the 1-D Maxwell velocity distribution.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rydgate/constants.hpp"
#include "rydgate/error.hpp"
#include "rydgate/ini.hpp"
#include "rydgate/numfmt.hpp"

namespace rydgate {

struct SpeciesLevels {
  std::string species_name;                     // section key, e.g. "rb87"
  std::string display_name;                     // e.g. "87Rb"
  std::map<std::string, double> level_energies; // cm⁻¹ above ground; includes "ground"
  double rydberg_energy = 0.0;                  // cm⁻¹, n ~ 100 S term
  double atomic_mass = 0.0;                     // kg
  std::vector<std::string> e1_options;
  std::vector<std::string> e2_options;

  double energy(const std::string& label) const {
    const auto it = level_energies.find(label);
    if (it == level_energies.end())
      throw LookupError("species '" + species_name + "' has no level '" + label + "'");
    return it->second;
  }

  double ground_energy() const { return energy("ground"); }

  void validate() const {
    if (!(atomic_mass > 0.0)) throw ConfigError(species_name + ": mass must be positive");
    const double ground = ground_energy();
    for (const auto& [label, e] : level_energies) {
      if (!std::isfinite(e)) throw ConfigError(species_name + ": non-finite energy for " + label);
      if (label != "ground" && !(e > ground))
        throw ConfigError(species_name + ": level " + label + " not above ground");
      if (!(e < rydberg_energy))
        throw ConfigError(species_name + ": level " + label + " not below the Rydberg level");
    }
    for (const auto& l : e1_options) energy(l);
    for (const auto& l : e2_options) energy(l);
  }
};

struct SchemeSelection {
  std::string e1;  // intermediate of |g> <-> |r1>
  std::string e2;  // intermediate of |r2> <-> |r1>
};

struct WavevectorPair {
  double k = 0.0;   // rad/m
  double kw = 0.0;  // rad/m

  double ratio() const { return kw / k; }
  bool feasible() const { return kw > 2.0 * k; }
};

class AtomicDatabase {
 public:
  AtomicDatabase() = default;
  explicit AtomicDatabase(std::vector<SpeciesLevels> species) : species_(std::move(species)) {}

  const SpeciesLevels& at(const std::string& name) const {
    for (const auto& s : species_)
      if (s.species_name == name) return s;
    throw LookupError("unknown species '" + name + "'");
  }

  const std::vector<SpeciesLevels>& species() const { return species_; }

 private:
  std::vector<SpeciesLevels> species_;
};

inline SpeciesLevels parse_species(const IniSection& section) {
  SpeciesLevels s;
  s.species_name = section.name;
  s.display_name = section.find("name").value_or(section.name);
  bool have_mass = false, have_rydberg = false;
  for (const auto& [key, value] : section.entries) {
    if (key == "name") continue;
    if (key == "mass") {
      s.atomic_mass = parse_double(value);
      have_mass = true;
    } else if (key == "rydberg") {
      s.rydberg_energy = parse_double(value);
      have_rydberg = true;
    } else if (key == "e1_options") {
      s.e1_options = split_list(value);
    } else if (key == "e2_options") {
      s.e2_options = split_list(value);
    } else {
      s.level_energies[key] = parse_double(value);
    }
  }
  if (!have_mass) throw ConfigError(section.name + ": missing key 'mass'");
  if (!have_rydberg) throw ConfigError(section.name + ": missing key 'rydberg'");
  if (!s.level_energies.contains("ground")) throw ConfigError(section.name + ": missing key 'ground'");
  s.validate();
  return s;
}

inline AtomicDatabase parse_atomic_data(const IniDocument& doc) {
  std::vector<SpeciesLevels> species;
  for (const auto& section : doc.sections) species.push_back(parse_species(section));
  return AtomicDatabase(std::move(species));
}

inline AtomicDatabase load_atomic_data(const std::string& path) {
  return parse_atomic_data(load_ini(path));
}

/// k = 2π|1/λ_up − 1/λ_lower| for the counterpropagating ground -> e1 -> Rydberg drive.
inline double compute_k(const SpeciesLevels& levels, const SchemeSelection& scheme) {
  const double e1 = levels.energy(scheme.e1);
  if (!(levels.rydberg_energy > e1))
    throw DomainError("Rydberg level must lie above " + scheme.e1);
  const double sigma_lower = e1 - levels.ground_energy();
  const double sigma_up = levels.rydberg_energy - e1;
  return two_pi * per_cm_to_per_m(std::abs(sigma_up - sigma_lower));
}

/// kw = 4π/λ_w. Both legs of r2 -> e2 -> r1 have wavelength λ_w because r1
/// and r2 are nearly degenerate, so the counterpropagating legs add.
inline double compute_kw(const SpeciesLevels& levels, const SchemeSelection& scheme) {
  const double e2 = levels.energy(scheme.e2);
  if (!(levels.rydberg_energy > e2))
    throw DomainError("Rydberg level must lie above " + scheme.e2);
  return 2.0 * two_pi * per_cm_to_per_m(levels.rydberg_energy - e2);
}

inline WavevectorPair compute_wavevectors(const SpeciesLevels& levels, const SchemeSelection& scheme) {
  return {compute_k(levels, scheme), compute_kw(levels, scheme)};
}

struct SchemeRow {
  SchemeSelection scheme;
  WavevectorPair wavevectors;
  double ratio = 0.0;
  bool feasible = false;
};

inline std::vector<SchemeRow> scheme_table(const SpeciesLevels& levels) {
  std::vector<SchemeRow> rows;
  for (const auto& e1 : levels.e1_options) {
    for (const auto& e2 : levels.e2_options) {
      SchemeSelection scheme{e1, e2};
      const auto w = compute_wavevectors(levels, scheme);
      rows.push_back({scheme, w, w.ratio(), w.feasible()});
    }
  }
  return rows;
}

// Interactions ---------------------------------------------------------------

struct C6Coefficients {
  double c11 = 0.0;  // rad·μm⁶/s, |r1 r1>
  double c12 = 0.0;  // |r1 r2>, |r2 r1>
  double c22 = 0.0;  // |r2 r2>

  static C6Coefficients from_thz(double c11_thz, double c12_thz, double c22_thz) {
    return {thz_um6_to_rad_per_s(c11_thz), thz_um6_to_rad_per_s(c12_thz),
            thz_um6_to_rad_per_s(c22_thz)};
  }
};

/// C6/2π of the 99S/100S pairs of 87Rb in THz·μm⁶, and the default spacing.
inline constexpr double default_c6_11_thz = 50.0;
inline constexpr double default_c6_12_thz = 68.0;
inline constexpr double default_c6_22_thz = 56.0;
inline constexpr double default_spacing_um = 8.0;

struct InteractionSet {
  C6Coefficients c6;
  double spacing_um = 0.0;
  double v11 = 0.0;  // rad/s
  double v12 = 0.0;
  double v22 = 0.0;

  static InteractionSet none() { return {}; }
};

inline InteractionSet vdw_interactions(const C6Coefficients& c6, double spacing_um) {
  if (!(spacing_um > 0.0) || !std::isfinite(spacing_um))
    throw DomainError("atom spacing must be positive and finite");
  const double l6 = std::pow(spacing_um, 6);
  return {c6, spacing_um, c6.c11 / l6, c6.c12 / l6, c6.c22 / l6};
}

inline InteractionSet default_interactions() {
  return vdw_interactions(
      C6Coefficients::from_thz(default_c6_11_thz, default_c6_12_thz, default_c6_22_thz),
      default_spacing_um);
}

// Thermal ensemble -----------------------------------------------------------

struct ThermalEnsemble {
  double temperature = 0.0;  // K
  double atomic_mass = 0.0;  // kg
  int grid_points = 100;
  double v_max = 0.5;        // m/s

  double v_rms() const { return std::sqrt(boltzmann * temperature / atomic_mass); }

  std::vector<double> velocity_grid() const;
};

/// Inclusive uniform grid on [−v_max, v_max]; a single point sits at 0.
inline std::vector<double> velocity_grid(int points, double v_max) {
  if (points < 1) throw DomainError("velocity grid needs at least one point");
  if (points == 1) return {0.0};
  std::vector<double> v(static_cast<std::size_t>(points));
  const double step = 2.0 * v_max / (points - 1);
  for (int j = 0; j < points; ++j) v[static_cast<std::size_t>(j)] = -v_max + j * step;
  return v;
}

inline std::vector<double> ThermalEnsemble::velocity_grid() const { return rydgate::velocity_grid(grid_points, v_max); }

/// One-dimensional Maxwell distribution G(v), s/m.
inline double maxwell_weight(const ThermalEnsemble& ensemble, double v) {
  if (!(ensemble.temperature > 0.0)) throw DomainError("temperature must be positive");
  if (!(ensemble.atomic_mass > 0.0)) throw DomainError("atomic mass must be positive");
  const double kt = boltzmann * ensemble.temperature;
  return std::sqrt(ensemble.atomic_mass / (two_pi * kt)) *
         std::exp(-ensemble.atomic_mass * v * v / (2.0 * kt));
}

}  // namespace rydgate
