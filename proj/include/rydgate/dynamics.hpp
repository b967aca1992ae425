#pragma once

// Time-dependent Hamiltonians for one or two drifting atoms and their
// Schrödinger evolution.
//
// Every drive is a constant-magnitude coupling Ω/2·e^{ik(z0+vt)}|to><from|
// + h.c. that is switched on over a half-open time interval. Bare level
// energies and intermediate-state detunings are already eliminated, so the
// only diagonal terms are the van der Waals shifts of doubly excited pairs.
//
// Two propagators are provided:
//  * rk4: fixed-step classical Runge–Kutta on the lab-frame generator, with
//    step edges aligned to every drive switching time;
//  * exact: each drive phase advances linearly in time, so a diagonal frame
//    rotation D (d_to − d_from = −kv for every coupling) makes the generator
//    piecewise constant. Each constant interval is exponentiated through a
//    Hermitian eigendecomposition.
// The two share nothing beyond the HamiltonianModel description and are used
// to check each other.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rydgate/atomdata.hpp"
#include "rydgate/error.hpp"
#include "rydgate/schedule.hpp"

namespace rydgate {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Basis ------------------------------------------------------------------------

enum class BasisKind { undriven, single_atom, two_atom };

/// Single-atom levels; `ground` is the qubit state |1>.
enum class Level : int { ground = 0, r1 = 1, r2 = 2 };

inline constexpr int single_atom_dim = 3;
inline constexpr int two_atom_dim = 9;

/// Two-atom basis order (control ⊗ target). The first six entries follow the
/// ordering {|r2r2>, |r1r2>, |r2r1>, |r1r1>, |r2 1>, |r1 1>} of the
/// double-excitation block; the remaining three are the states with the
/// control in |1>.
inline constexpr std::array<std::pair<Level, Level>, two_atom_dim> two_atom_basis{{
    {Level::r2, Level::r2},
    {Level::r1, Level::r2},
    {Level::r2, Level::r1},
    {Level::r1, Level::r1},
    {Level::r2, Level::ground},
    {Level::r1, Level::ground},
    {Level::ground, Level::r2},
    {Level::ground, Level::r1},
    {Level::ground, Level::ground},
}};

inline constexpr std::array<std::string_view, two_atom_dim> two_atom_labels{
    "r2r2", "r1r2", "r2r1", "r1r1", "r2 1", "r1 1", "1 r2", "1 r1", "11"};

inline constexpr int two_atom_index(Level control, Level target) {
  for (int i = 0; i < two_atom_dim; ++i)
    if (two_atom_basis[static_cast<std::size_t>(i)].first == control &&
        two_atom_basis[static_cast<std::size_t>(i)].second == target)
      return i;
  return -1;
}

inline constexpr int rydberg_count(int two_atom_idx) {
  const auto [c, t] = two_atom_basis[static_cast<std::size_t>(two_atom_idx)];
  return (c != Level::ground ? 1 : 0) + (t != Level::ground ? 1 : 0);
}

struct StateVector {
  BasisKind basis = BasisKind::undriven;
  CVector amplitudes;

  int dimension() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }

  /// Index of the computational (all-qubit-|1>, or undriven |0>) amplitude.
  int computational_index() const {
    switch (basis) {
      case BasisKind::undriven: return 0;
      case BasisKind::single_atom: return static_cast<int>(Level::ground);
      case BasisKind::two_atom: return two_atom_index(Level::ground, Level::ground);
    }
    return 0;
  }
  cplx computational_amplitude() const { return amplitudes(computational_index()); }

  static StateVector basis_state(BasisKind kind, int index) {
    const int dim = kind == BasisKind::undriven ? 1 : kind == BasisKind::single_atom ? single_atom_dim
                                                                                      : two_atom_dim;
    StateVector s{kind, CVector::Zero(dim)};
    s.amplitudes(index) = 1.0;
    return s;
  }
};

struct TrajectoryParams {
  double z0 = 0.0;  // m
  double v = 0.0;   // m/s
};

// Hamiltonian model --------------------------------------------------------------

struct DriveTerm {
  double rabi = 0.0;
  double wavevector = 0.0;
  double z0 = 0.0;
  double v = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<std::pair<int, int>> couplings;  // (to, from)

  bool active_at(double t) const { return t >= t_begin && t < t_end; }
  double phase(double t) const { return wavevector * (z0 + v * t); }
  /// Rate of phase advance, k·v.
  double phase_rate() const { return wavevector * v; }
};

class HamiltonianModel {
 public:
  HamiltonianModel() = default;
  HamiltonianModel(BasisKind basis, Eigen::VectorXd diagonal, std::vector<DriveTerm> terms)
      : basis_(basis), diagonal_(std::move(diagonal)), terms_(std::move(terms)) {}

  BasisKind basis() const { return basis_; }
  int dimension() const { return static_cast<int>(diagonal_.size()); }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  const std::vector<DriveTerm>& terms() const { return terms_; }

  std::vector<int> active_terms(double t) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(terms_.size()); ++i)
      if (terms_[static_cast<std::size_t>(i)].active_at(t)) out.push_back(i);
    return out;
  }

  /// Dense H(t) in rad/s.
  CMatrix matrix(double t) const { return matrix_with(t, active_terms(t)); }

  CMatrix matrix_with(double t, const std::vector<int>& active) const {
    CMatrix h = CMatrix::Zero(dimension(), dimension());
    h.diagonal() = diagonal_.cast<cplx>();
    for (int i : active) {
      const auto& term = terms_[static_cast<std::size_t>(i)];
      const cplx c = 0.5 * term.rabi * std::polar(1.0, term.phase(t));
      for (auto [to, from] : term.couplings) {
        h(to, from) += c;
        h(from, to) += std::conj(c);
      }
    }
    return h;
  }

  /// out = H(t)·psi using only the listed drive terms.
  void apply(double t, const std::vector<int>& active, const CVector& psi, CVector& out) const {
    out = diagonal_.cast<cplx>().cwiseProduct(psi);
    for (int i : active) {
      const auto& term = terms_[static_cast<std::size_t>(i)];
      const cplx c = 0.5 * term.rabi * std::polar(1.0, term.phase(t));
      const cplx cc = std::conj(c);
      for (auto [to, from] : term.couplings) {
        out(to) += c * psi(from);
        out(from) += cc * psi(to);
      }
    }
  }

  /// Sorted switching times inside [t0, t1], endpoints included, with
  /// near-coincident times (within 1e-12 of the span) merged.
  std::vector<double> breakpoints(double t0, double t1) const {
    std::vector<double> raw{t0, t1};
    for (const auto& term : terms_) {
      for (double t : {term.t_begin, term.t_end})
        if (t > t0 && t < t1) raw.push_back(t);
    }
    std::sort(raw.begin(), raw.end());
    const double tol = 1e-12 * std::max(std::abs(t1 - t0), std::numeric_limits<double>::min());
    std::vector<double> out;
    for (double t : raw) {
      if (out.empty() || t - out.back() > tol) out.push_back(t);
      else if (t == t1) out.back() = t1;
    }
    if (out.size() == 1) out.push_back(t1);
    return out;
  }

 private:
  BasisKind basis_ = BasisKind::single_atom;
  Eigen::VectorXd diagonal_;
  std::vector<DriveTerm> terms_;
};

namespace detail {

inline std::pair<int, int> single_atom_pair(Transition tr) {
  return tr == Transition::ground_r1
             ? std::pair{static_cast<int>(Level::r1), static_cast<int>(Level::ground)}
             : std::pair{static_cast<int>(Level::r1), static_cast<int>(Level::r2)};
}

inline std::pair<Level, Level> level_pair(Transition tr) {
  return tr == Transition::ground_r1 ? std::pair{Level::r1, Level::ground} : std::pair{Level::r1, Level::r2};
}

inline DriveTerm term_for(const PulseSegment& seg, const TrajectoryParams& traj) {
  return {seg.rabi, seg.wavevector, traj.z0, traj.v, seg.t_start, seg.t_end(), {}};
}

}  // namespace detail

/// Three-level model {g, r1, r2} driven by the segments that belong to `atom`.
inline HamiltonianModel single_atom_model(const std::vector<PulseSegment>& segments, Atom atom,
                                          const TrajectoryParams& traj) {
  std::vector<DriveTerm> terms;
  for (const auto& seg : segments) {
    if (seg.atom != atom) continue;
    auto term = detail::term_for(seg, traj);
    term.couplings.push_back(detail::single_atom_pair(seg.transition));
    terms.push_back(std::move(term));
  }
  return {BasisKind::single_atom, Eigen::VectorXd::Zero(single_atom_dim), std::move(terms)};
}

/// Nine-state model for input |11>: H_c ⊗ 1 + 1 ⊗ H_t + Σ V_ab |r_a r_b><r_a r_b|.
inline HamiltonianModel two_atom_model(const GateSchedule& schedule, const TrajectoryParams& control,
                                       const TrajectoryParams& target, const InteractionSet& interactions) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(two_atom_dim);
  diag(two_atom_index(Level::r1, Level::r1)) = interactions.v11;
  diag(two_atom_index(Level::r1, Level::r2)) = interactions.v12;
  diag(two_atom_index(Level::r2, Level::r1)) = interactions.v12;
  diag(two_atom_index(Level::r2, Level::r2)) = interactions.v22;

  constexpr std::array spectator{Level::ground, Level::r1, Level::r2};
  std::vector<DriveTerm> terms;
  for (const auto& seg : schedule.all_segments()) {
    const bool on_control = seg.atom == Atom::control;
    auto term = detail::term_for(seg, on_control ? control : target);
    const auto [to, from] = detail::level_pair(seg.transition);
    for (Level other : spectator) {
      term.couplings.emplace_back(on_control ? two_atom_index(to, other) : two_atom_index(other, to),
                                  on_control ? two_atom_index(from, other) : two_atom_index(other, from));
    }
    terms.push_back(std::move(term));
  }
  return {BasisKind::two_atom, diag, std::move(terms)};
}

inline Eigen::Matrix3cd h_single_ground_rydberg(const PulseSegment& seg, const TrajectoryParams& traj, double t) {
  if (seg.transition != Transition::ground_r1)
    throw std::invalid_argument("h_single_ground_rydberg: segment is not a ground-Rydberg drive");
  return single_atom_model({seg}, seg.atom, traj).matrix(t);
}

inline Eigen::Matrix3cd h_rydberg_rydberg(const PulseSegment& seg, const TrajectoryParams& traj, double t) {
  if (seg.transition != Transition::r1_r2)
    throw std::invalid_argument("h_rydberg_rydberg: segment is not a Rydberg-Rydberg drive");
  return single_atom_model({seg}, seg.atom, traj).matrix(t);
}

inline CMatrix h_two_atom(const GateSchedule& schedule, const TrajectoryParams& control,
                          const TrajectoryParams& target, const InteractionSet& interactions, double t) {
  return two_atom_model(schedule, control, target, interactions).matrix(t);
}

// Integration ---------------------------------------------------------------------

enum class IntegratorMethod { rk4, exact };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::rk4;
  double step_size = 0.0;        // s; 0 picks the largest step allowed below
  double max_phase_step = 1e-3;  // rad, bound on ||H||·dt
  int min_steps_per_interval = 100;
  bool richardson_check = false;
};

struct Evolution {
  StateVector state;
  double residence = 0.0;        // ∫ Σ_tracked |ψ_n|² dt, s
  double richardson_delta = 0.0; // max |ψ(dt) − ψ(dt/2)|, rk4 with the check on
  long steps = 0;
};

namespace detail {

/// ∞-norm of |H| on an interval; bounds the spectral norm of the Hermitian H.
inline double interval_norm_bound(const HamiltonianModel& model, const std::vector<int>& active) {
  Eigen::VectorXd rows = model.diagonal().cwiseAbs();
  for (int i : active) {
    const auto& term = model.terms()[static_cast<std::size_t>(i)];
    for (auto [to, from] : term.couplings) {
      rows(to) += 0.5 * term.rabi;
      rows(from) += 0.5 * term.rabi;
    }
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

inline double tracked_population(const CVector& psi, const std::vector<int>& tracked) {
  double p = 0.0;
  for (int i : tracked) p += std::norm(psi(i));
  return p;
}

struct Rk4Plan {
  std::vector<double> edges;
  std::vector<std::vector<int>> active;
  std::vector<long> steps;
};

inline Rk4Plan plan_rk4(const HamiltonianModel& model, double t0, double t1, const IntegratorConfig& cfg) {
  Rk4Plan plan;
  plan.edges = model.breakpoints(t0, t1);
  double norm = 0.0;
  for (std::size_t i = 0; i + 1 < plan.edges.size(); ++i) {
    plan.active.push_back(model.active_terms(0.5 * (plan.edges[i] + plan.edges[i + 1])));
    norm = std::max(norm, interval_norm_bound(model, plan.active.back()));
  }
  double dt_max = std::numeric_limits<double>::infinity();
  if (norm > 0.0) dt_max = cfg.max_phase_step / norm;
  if (cfg.step_size > 0.0) {
    if (cfg.step_size * norm > cfg.max_phase_step * (1.0 + 1e-12))
      throw ConfigError("step size violates ||H|| dt <= " + format_g17(cfg.max_phase_step));
    dt_max = cfg.step_size;
  }
  for (std::size_t i = 0; i + 1 < plan.edges.size(); ++i) {
    const double len = plan.edges[i + 1] - plan.edges[i];
    long n = std::max<long>(cfg.min_steps_per_interval, 1);
    if (std::isfinite(dt_max)) n = std::max<long>(n, static_cast<long>(std::ceil(len / dt_max)));
    plan.steps.push_back(n);
  }
  return plan;
}

inline Evolution run_rk4(const HamiltonianModel& model, const StateVector& psi0, const Rk4Plan& plan,
                         long refine, const std::vector<int>& tracked) {
  CVector psi = psi0.amplitudes;
  const int dim = model.dimension();
  CVector k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const cplx minus_i(0.0, -1.0);
  Evolution ev;
  double p_prev = tracked_population(psi, tracked);
  for (std::size_t seg = 0; seg + 1 < plan.edges.size(); ++seg) {
    const double a = plan.edges[seg];
    const double len = plan.edges[seg + 1] - a;
    const long n = plan.steps[seg] * refine;
    const double dt = len / static_cast<double>(n);
    const auto& active = plan.active[seg];
    for (long s = 0; s < n; ++s) {
      const double t = a + len * static_cast<double>(s) / static_cast<double>(n);
      model.apply(t, active, psi, k1);
      k1 *= minus_i;
      tmp = psi + (0.5 * dt) * k1;
      model.apply(t + 0.5 * dt, active, tmp, k2);
      k2 *= minus_i;
      tmp = psi + (0.5 * dt) * k2;
      model.apply(t + 0.5 * dt, active, tmp, k3);
      k3 *= minus_i;
      tmp = psi + dt * k3;
      model.apply(t + dt, active, tmp, k4);
      k4 *= minus_i;
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!tracked.empty()) {
        const double p = tracked_population(psi, tracked);
        ev.residence += 0.5 * dt * (p_prev + p);
        p_prev = p;
      }
    }
    ev.steps += n;
  }
  ev.state = {psi0.basis, psi};
  return ev;
}

/// Diagonal frame rates with d_to − d_from = −k·v for every coupling.
inline Eigen::VectorXd comoving_frame(const HamiltonianModel& model) {
  const int dim = model.dimension();
  std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(dim));
  for (const auto& term : model.terms()) {
    for (auto [to, from] : term.couplings) {
      adj[static_cast<std::size_t>(from)].emplace_back(to, -term.phase_rate());
      adj[static_cast<std::size_t>(to)].emplace_back(from, term.phase_rate());
    }
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  for (int root = 0; root < dim; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int n = q.front();
      q.pop();
      for (auto [m, shift] : adj[static_cast<std::size_t>(n)]) {
        const double want = d(n) + shift;
        if (!seen[static_cast<std::size_t>(m)]) {
          seen[static_cast<std::size_t>(m)] = true;
          d(m) = want;
          q.push(m);
        } else if (std::abs(d(m) - want) > 1e-9 * (std::abs(want) + 1.0)) {
          throw ConfigError("drive phases admit no common co-moving frame");
        }
      }
    }
  }
  return d;
}

/// ∫_0^τ e^{−iωs} ds, stable through ω → 0.
inline cplx phase_integral(double omega, double tau) {
  const double x = 0.5 * omega * tau;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return tau * sinc * std::polar(1.0, -x);
}

inline Evolution run_exact(const HamiltonianModel& model, const StateVector& psi0, double t0, double t1,
                           const std::vector<int>& tracked) {
  const Eigen::VectorXd d = comoving_frame(model);
  const auto edges = model.breakpoints(t0, t1);
  const int dim = model.dimension();
  auto frame = [&](double t, double sign) {
    CVector f(dim);
    for (int n = 0; n < dim; ++n) f(n) = std::polar(1.0, sign * d(n) * t);
    return f;
  };
  // φ(t) = e^{iDt} ψ(t)
  CVector phi = frame(t0, 1.0).cwiseProduct(psi0.amplitudes);
  Evolution ev;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver;
  for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg) {
    const double a = edges[seg];
    const double tau = edges[seg + 1] - a;
    const auto active = model.active_terms(0.5 * (a + edges[seg + 1]));
    // Drive phases frozen at t = 0; the frame carries the k·v·t part.
    CMatrix h = model.matrix_with(0.0, active);
    h.diagonal() -= d.cast<cplx>();
    solver.compute(h);
    const CMatrix& u = solver.eigenvectors();
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    const CVector c = u.adjoint() * phi;
    if (!tracked.empty()) {
      // ∫ Σ_r |Σ_j c_j u_rj e^{−iλ_j s}|² ds
      for (int j = 0; j < dim; ++j) {
        for (int l = 0; l < dim; ++l) {
          cplx overlap = 0.0;
          for (int r : tracked) overlap += u(r, j) * std::conj(u(r, l));
          if (overlap == cplx(0.0)) continue;
          ev.residence += std::real(c(j) * std::conj(c(l)) * overlap * phase_integral(lambda(j) - lambda(l), tau));
        }
      }
    }
    CVector rotated(dim);
    for (int j = 0; j < dim; ++j) rotated(j) = std::polar(1.0, -lambda(j) * tau) * c(j);
    phi = u * rotated;
    ++ev.steps;
  }
  ev.state = {psi0.basis, frame(t1, -1.0).cwiseProduct(phi)};
  return ev;
}

}  // namespace detail

/// Propagates psi0 from t0 to t1 and integrates the population of `tracked`.
inline Evolution evolve_tracked(const HamiltonianModel& model, const StateVector& psi0, double t0, double t1,
                                const IntegratorConfig& config, const std::vector<int>& tracked = {}) {
  if (psi0.dimension() != model.dimension()) throw ConfigError("state and Hamiltonian dimensions differ");
  if (!(t1 >= t0)) throw ConfigError("evolution span must be forward in time");
  if (config.method == IntegratorMethod::exact) return detail::run_exact(model, psi0, t0, t1, tracked);

  if (!(config.max_phase_step > 0.0)) throw ConfigError("max_phase_step must be positive");
  const auto plan = detail::plan_rk4(model, t0, t1, config);
  if (!config.richardson_check) return detail::run_rk4(model, psi0, plan, 1, tracked);
  const auto coarse = detail::run_rk4(model, psi0, plan, 1, tracked);
  auto fine = detail::run_rk4(model, psi0, plan, 2, tracked);
  fine.richardson_delta = (fine.state.amplitudes - coarse.state.amplitudes).cwiseAbs().maxCoeff();
  return fine;
}

inline StateVector evolve(const HamiltonianModel& model, const StateVector& psi0, double t0, double t1,
                          const IntegratorConfig& config) {
  return evolve_tracked(model, psi0, t0, t1, config).state;
}

// Gate inputs ---------------------------------------------------------------------

enum class InputState { q00, q01, q10, q11 };  // |control target>

inline constexpr std::array all_inputs{InputState::q00, InputState::q01, InputState::q10, InputState::q11};

inline std::string_view to_string(InputState s) {
  switch (s) {
    case InputState::q00: return "00";
    case InputState::q01: return "01";
    case InputState::q10: return "10";
    case InputState::q11: return "11";
  }
  return "?";
}

struct InputResult {
  InputState input = InputState::q00;
  StateVector state;
  double rydberg_residence = 0.0;  // s in singly excited states
};

inline const std::vector<int>& single_rydberg_levels(BasisKind basis) {
  static const std::vector<int> none{};
  static const std::vector<int> single{static_cast<int>(Level::r1), static_cast<int>(Level::r2)};
  static const std::vector<int> pair = [] {
    std::vector<int> out;
    for (int i = 0; i < two_atom_dim; ++i)
      if (rydberg_count(i) == 1) out.push_back(i);
    return out;
  }();
  switch (basis) {
    case BasisKind::single_atom: return single;
    case BasisKind::two_atom: return pair;
    default: return none;
  }
}

/// Runs one computational input through the gate. |0> is not addressed by
/// any laser, so |00> is trivial and |01>, |10> reduce to one driven atom.
inline InputResult simulate_input(InputState input, const GateSchedule& schedule, const TrajectoryParams& control,
                                  const TrajectoryParams& target, const InteractionSet& interactions,
                                  const IntegratorConfig& config) {
  InputResult out{input, {}, 0.0};
  auto run = [&](const HamiltonianModel& model) {
    const auto psi0 = StateVector::basis_state(model.basis(), StateVector{model.basis(), {}}.computational_index());
    const auto ev = evolve_tracked(model, psi0, 0.0, schedule.t_gate, config, single_rydberg_levels(model.basis()));
    out.state = ev.state;
    out.rydberg_residence = ev.residence;
  };
  switch (input) {
    case InputState::q00:
      out.state = StateVector::basis_state(BasisKind::undriven, 0);
      break;
    case InputState::q01:
      run(single_atom_model(schedule.target_segments, Atom::target, target));
      break;
    case InputState::q10:
      run(single_atom_model(schedule.control_segments, Atom::control, control));
      break;
    case InputState::q11:
      run(two_atom_model(schedule, control, target, interactions));
      break;
  }
  return out;
}

}  // namespace rydgate
