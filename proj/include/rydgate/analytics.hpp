#pragma once

// Closed-form phase bookkeeping, the exact constant-detuning two-level
// propagator, diagonal gate extraction and the gate error metrics, including
// the Maxwell-weighted average over a (v_c, v_t) velocity grid.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "rydgate/atomdata.hpp"
#include "rydgate/constants.hpp"
#include "rydgate/dynamics.hpp"
#include "rydgate/error.hpp"
#include "rydgate/numfmt.hpp"
#include "rydgate/parallel.hpp"
#include "rydgate/schedule.hpp"

namespace rydgate {

/// Rydberg lifetimes of the n ~ 100 S states at 4 K and 300 K.
inline constexpr double rydberg_lifetime_4k = 1.2e-3;
inline constexpr double rydberg_lifetime_300k = 0.3e-3;

/// Maps to (−π, π].
inline double wrap_phase(double phi) {
  double w = std::remainder(phi, two_pi);
  if (w <= -pi) w += two_pi;
  return w;
}

// Phase ledger ---------------------------------------------------------------

/// Phase of |r1> after the first π pulse: k z0 + k v t_π/2 − π/2.
inline double phase_after_pi(double k, double z0, double v, double omega1) {
  if (!(omega1 > 0.0)) throw DomainError("omega1 must be positive");
  const double t_pi = pi / omega1;
  return k * z0 + 0.5 * k * v * t_pi - 0.5 * pi;
}

/// Phase of |r1> after the 2Nπ loop: φ1 + kw v t_w/2 − Nπ.
inline double phase_after_wait(double phi1, double kw, double v, double omega2, int n_loops) {
  if (!(omega2 > 0.0)) throw DomainError("omega2 must be positive");
  const double t_w = two_pi * n_loops / omega2;
  return phi1 + 0.5 * kw * v * t_w - n_loops * pi;
}

/// Phase of |g> after the closing π pulse: φ2 − k z0 − k v (t_w + 3t_π/2) − π/2.
inline double phase_after_final(double phi2, double k, double z0, double v, double omega1, double t_w) {
  if (!(omega1 > 0.0)) throw DomainError("omega1 must be positive");
  const double t_pi = pi / omega1;
  return phi2 - k * z0 - k * v * (t_w + 1.5 * t_pi) - 0.5 * pi;
}

struct PhaseLedger {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
};

inline PhaseLedger predict_phases(const ProtocolParams& p, double z0, double v) {
  PhaseLedger l;
  l.phi1 = phase_after_pi(p.k, z0, v, p.omega1);
  l.phi2 = phase_after_wait(l.phi1, p.kw, v, p.omega2, p.n_loops);
  l.phi3 = phase_after_final(l.phi2, p.k, z0, v, p.omega1, two_pi * p.n_loops / p.omega2);
  return l;
}

// Closed-form two-level propagator ---------------------------------------------

/// Exact propagator in the basis (|g>, |e>) for
///   H(s) = Ω/2 e^{i(φ0 + δ s)} |e><g| + h.c.,  s ∈ [0, duration],
/// i.e. constant Rabi magnitude with constant Doppler detuning δ = k v.
inline Eigen::Matrix2cd constant_detuning_propagator(double omega, double detuning, double duration,
                                                     double drive_phase_at_start) {
  if (!(duration >= 0.0)) throw DomainError("duration must be non-negative");
  const double gen = std::hypot(omega, detuning);
  const double half = 0.5 * gen * duration;
  const cplx cos_term = std::cos(half);
  // sin(Ω̃T/2)/Ω̃ with the Ω̃ → 0 limit T/2
  const double sinc = gen > 0.0 ? std::sin(half) / gen : 0.5 * duration;
  const cplx mi(0.0, -1.0);
  Eigen::Matrix2cd m;
  m(0, 0) = cos_term - mi * detuning * sinc;
  m(1, 1) = cos_term + mi * detuning * sinc;
  m(0, 1) = mi * omega * sinc;
  m(1, 0) = mi * omega * sinc;
  m *= std::polar(1.0, -0.5 * detuning * duration);
  const Eigen::Matrix2cd r_end = Eigen::Vector2cd(1.0, std::polar(1.0, drive_phase_at_start + detuning * duration)).asDiagonal();
  const Eigen::Matrix2cd r_start_inv = Eigen::Vector2cd(1.0, std::polar(1.0, -drive_phase_at_start)).asDiagonal();
  return r_end * m * r_start_inv;
}

/// |<e|ψ>|² after duration from |g>: (Ω²/Ω̃²) sin²(Ω̃ t/2).
inline double rabi_population(double omega, double detuning, double duration) {
  const double gen = std::hypot(omega, detuning);
  if (gen == 0.0) return 0.0;
  const double s = std::sin(0.5 * gen * duration);
  return omega * omega / (gen * gen) * s * s;
}

// Gate matrix and errors ---------------------------------------------------------

struct GateMatrix {
  cplx a{1.0};  // <01|U|01>
  cplx b{1.0};  // <10|U|10>
  cplx c{1.0};  // <11|U|11>

  Eigen::Matrix4cd matrix() const {
    return Eigen::Vector4cd(1.0, a, b, c).asDiagonal();
  }
};

/// Target controlled-phase gate diag(1, −1, −1, −1).
inline Eigen::Matrix4cd ideal_gate() { return Eigen::Vector4cd(1.0, -1.0, -1.0, -1.0).asDiagonal(); }

inline BasisKind expected_basis(InputState s) {
  switch (s) {
    case InputState::q00: return BasisKind::undriven;
    case InputState::q01:
    case InputState::q10: return BasisKind::single_atom;
    case InputState::q11: return BasisKind::two_atom;
  }
  return BasisKind::undriven;
}

/// Diagonal gate from the final states of inputs 00, 01, 10, 11 (in that order).
inline GateMatrix extract_gate(const std::array<StateVector, 4>& finals) {
  for (std::size_t i = 0; i < finals.size(); ++i) {
    const auto want = expected_basis(all_inputs[i]);
    const int dim = want == BasisKind::undriven ? 1 : want == BasisKind::single_atom ? single_atom_dim : two_atom_dim;
    if (finals[i].basis != want || finals[i].dimension() != dim)
      throw ConfigError("final state for input |" + std::string(to_string(all_inputs[i])) + "> has the wrong basis");
  }
  if (std::abs(finals[0].computational_amplitude() - cplx(1.0)) > 1e-12)
    throw ConfigError("input |00> must be left unchanged");
  return {finals[1].computational_amplitude(), finals[2].computational_amplitude(),
          finals[3].computational_amplitude()};
}

/// E_ro = 1 − [|Tr(U†𝒰)|² + Tr(U†𝒰𝒰†U)]/20 against U = diag(1, −1, −1, −1).
inline double rotation_error(const GateMatrix& gate) {
  const Eigen::Matrix4cd u = ideal_gate();
  const Eigen::Matrix4cd g = gate.matrix();
  const cplx overlap = (u.adjoint() * g).trace();
  const cplx purity = (u.adjoint() * g * g.adjoint() * u).trace();
  return 1.0 - (std::norm(overlap) + purity.real()) / 20.0;
}

/// Residence times in the singly excited manifold for inputs 01, 10, 11.
struct ResidenceTimes {
  double t01 = 0.0;
  double t10 = 0.0;
  double t11 = 0.0;

  double sum() const { return t01 + t10 + t11; }
};

inline double decay_error(const ResidenceTimes& residence, double tau) {
  if (!(tau > 0.0)) throw DomainError("Rydberg lifetime must be positive");
  return residence.sum() / (4.0 * tau);
}

struct ErrorBreakdown {
  double e_ro = 0.0;
  double e_decay = 0.0;
  ResidenceTimes residence_times;
  double tau = 0.0;

  double total() const { return e_ro + e_decay; }
};

/// Comparator gate: one Rydberg level whose pair shift is taken equal to V22.
inline InteractionSet comparator_interactions(const InteractionSet& set) {
  auto out = set;
  out.v11 = set.v22;
  return out;
}

struct GateRun {
  std::array<InputResult, 4> inputs;
  GateMatrix gate;
  double e_ro = 0.0;
  ResidenceTimes residence;

  ErrorBreakdown breakdown(double tau) const { return {e_ro, decay_error(residence, tau), residence, tau}; }
};

inline GateRun run_gate(const GateSchedule& schedule, const TrajectoryParams& control,
                        const TrajectoryParams& target, const InteractionSet& interactions,
                        const IntegratorConfig& config) {
  GateRun run;
  for (std::size_t i = 0; i < all_inputs.size(); ++i)
    run.inputs[i] = simulate_input(all_inputs[i], schedule, control, target, interactions, config);
  run.gate = extract_gate({run.inputs[0].state, run.inputs[1].state, run.inputs[2].state, run.inputs[3].state});
  run.e_ro = rotation_error(run.gate);
  run.residence = {run.inputs[1].rydberg_residence, run.inputs[2].rydberg_residence,
                   run.inputs[3].rydberg_residence};
  return run;
}

// Velocity-grid averaging ------------------------------------------------------

/// E_ro on a square (v_c, v_t) grid; cell (i, j) has v_c = v[i], v_t = v[j].
struct ErrorGrid {
  std::vector<double> velocities;
  std::vector<double> e_ro;  // row-major, index i * n + j

  std::size_t size() const { return velocities.size(); }
  double at(std::size_t i, std::size_t j) const { return e_ro[i * size() + j]; }
};

/// Cells are independent; |01> depends only on v_t and |10> only on v_c, so
/// those are evaluated once per grid value.
inline ErrorGrid rotation_error_grid(const GateSchedule& schedule, const std::vector<double>& velocities,
                                     const InteractionSet& interactions, const IntegratorConfig& config,
                                     double z0_control = 0.0, double z0_target = 0.0, unsigned workers = 0) {
  const std::size_t n = velocities.size();
  if (n == 0) throw DomainError("empty velocity grid");
  std::vector<cplx> a(n), b(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const TrajectoryParams still{};
        const TrajectoryParams c{z0_control, velocities[i]};
        const TrajectoryParams t{z0_target, velocities[i]};
        a[i] = simulate_input(InputState::q01, schedule, still, t, interactions, config).state.computational_amplitude();
        b[i] = simulate_input(InputState::q10, schedule, c, still, interactions, config).state.computational_amplitude();
      },
      workers);
  ErrorGrid grid{velocities, std::vector<double>(n * n)};
  parallel_for(
      n * n,
      [&](std::size_t cell) {
        const std::size_t i = cell / n, j = cell % n;
        const TrajectoryParams c{z0_control, velocities[i]};
        const TrajectoryParams t{z0_target, velocities[j]};
        const cplx c11 = simulate_input(InputState::q11, schedule, c, t, interactions, config).state.computational_amplitude();
        grid.e_ro[cell] = rotation_error({a[j], b[i], c11});
      },
      workers);
  return grid;
}

struct SweepResult {
  Protocol protocol = Protocol::pipulse;
  double temperature = 0.0;  // K
  double v_max = 0.0;
  ErrorGrid grid;
  std::vector<double> weights;  // G(v_c) G(v_t), same layout as grid.e_ro
  double weight_sum = 0.0;
  double mean_e_ro = 0.0;
};

/// Σ E_ro G(v_c) G(v_t) / Σ G(v_c) G(v_t), summed in fixed grid order.
inline SweepResult average_over(const ErrorGrid& grid, const ThermalEnsemble& ensemble, Protocol protocol) {
  const std::size_t n = grid.size();
  if (n == 0) throw DomainError("empty velocity grid");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = maxwell_weight(ensemble, grid.velocities[i]);
  SweepResult r{protocol, ensemble.temperature, ensemble.v_max, grid, std::vector<double>(n * n), 0.0, 0.0};
  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g[i] * g[j];
      r.weights[i * n + j] = w;
      r.weight_sum += w;
      num += w * grid.at(i, j);
    }
  }
  if (!(r.weight_sum > 0.0)) throw DomainError("velocity grid carries no thermal weight");
  r.mean_e_ro = num / r.weight_sum;
  return r;
}

inline SweepResult average_rotation_error(const GateSchedule& schedule, const ThermalEnsemble& ensemble,
                                          const InteractionSet& interactions, const IntegratorConfig& config,
                                          unsigned workers = 0) {
  const auto grid = rotation_error_grid(schedule, ensemble.velocity_grid(), interactions, config, 0.0, 0.0, workers);
  return average_over(grid, ensemble, schedule.protocol);
}

/// Per-cell CSV: `#` metadata, header v_c,v_t,weight,e_ro, one row per cell
/// in grid order, then a `#` summary record.
inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "# protocol=" << to_string(r.protocol) << '\n'
      << "# temperature_K=" << format_g17(r.temperature) << '\n'
      << "# grid_points=" << r.grid.size() << '\n'
      << "# v_max_m_per_s=" << format_g17(r.v_max) << '\n'
      << "# units: v_c=m/s, v_t=m/s, weight=s^2/m^2, e_ro=1\n"
      << "v_c,v_t,weight,e_ro\n";
  const std::size_t n = r.grid.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out << format_g17(r.grid.velocities[i]) << ',' << format_g17(r.grid.velocities[j]) << ','
          << format_g17(r.weights[i * n + j]) << ',' << format_g17(r.grid.at(i, j)) << '\n';
  out << "# summary: mean_e_ro=" << format_g17(r.mean_e_ro) << ", weight_sum=" << format_g17(r.weight_sum)
      << ", cells=" << n * n << '\n';
}

}  // namespace rydgate
