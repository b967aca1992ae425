#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rydgate/analytics.hpp"
#include "rydgate/dynamics.hpp"
#include "test_support.hpp"

using namespace rydgate;

namespace {

constexpr double mhz = two_pi * 1e6;

GateSchedule working_schedule() {
  const auto w = rydgate::test::rb_wavevectors();
  return build_gate_schedule(solve_condition(1.35 * mhz, 2, w.k, w.kw));
}

IntegratorConfig exact_config() {
  IntegratorConfig c;
  c.method = IntegratorMethod::exact;
  return c;
}

double max_hermitian_defect(const CMatrix& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

int idx(Level c, Level t) { return two_atom_index(c, t); }

}  // namespace

TEST(Basis, TwoAtomOrdering) {
  EXPECT_EQ(idx(Level::r2, Level::r2), 0);
  EXPECT_EQ(idx(Level::r1, Level::r2), 1);
  EXPECT_EQ(idx(Level::r2, Level::r1), 2);
  EXPECT_EQ(idx(Level::r1, Level::r1), 3);
  EXPECT_EQ(idx(Level::r2, Level::ground), 4);
  EXPECT_EQ(idx(Level::r1, Level::ground), 5);
  EXPECT_EQ(two_atom_labels[0], "r2r2");
  int singles = 0;
  for (int i = 0; i < two_atom_dim; ++i) singles += rydberg_count(i) == 1;
  EXPECT_EQ(singles, 4);
  EXPECT_EQ(rydberg_count(idx(Level::ground, Level::ground)), 0);
}

TEST(SingleAtomHamiltonian, GroundRydbergCoupling) {
  const double omega = 1.35 * mhz, k = 5.055e6;
  const auto seg = make_segment(Atom::control, Transition::ground_r1, omega, k, 0.0, pi);
  const auto h0 = h_single_ground_rydberg(seg, {}, 0.1e-6);
  EXPECT_EQ(h0(1, 0), cplx(0.5 * omega, 0.0));
  EXPECT_EQ(h0(0, 1), cplx(0.5 * omega, 0.0));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, seg.duration), v(-0.5, 0.5), z(-1e-5, 1e-5);
  for (int i = 0; i < 200; ++i) {
    const TrajectoryParams traj{z(rng), v(rng)};
    const double ti = t(rng);
    const auto h = h_single_ground_rydberg(seg, traj, ti);
    EXPECT_LE(max_hermitian_defect(h), 1e-14 * omega);
    EXPECT_NEAR(std::abs(h(1, 0)), 0.5 * omega, 1e-9);
    EXPECT_NEAR(wrap_phase(std::arg(h(1, 0)) - k * (traj.z0 + traj.v * ti)), 0.0, 1e-9);
    EXPECT_EQ(h(2, 1), cplx(0.0));
  }
  EXPECT_TRUE(h_single_ground_rydberg(seg, {}, 2.0 * seg.duration).isZero(0.0));
  EXPECT_THROW(h_rydberg_rydberg(seg, {}, 0.0), std::invalid_argument);
}

TEST(SingleAtomHamiltonian, RydbergRydbergCoupling) {
  const double omega2 = 1.287 * mhz, kw = 1.25e7, v = 0.2, z0 = 3e-6;
  const auto seg = make_segment(Atom::control, Transition::r1_r2, omega2, kw, 1e-7, 4.0 * pi);
  EXPECT_NEAR(seg.rabi * seg.duration, 4.0 * pi, 1e-12);
  const auto h = h_rydberg_rydberg(seg, {}, 2e-7);
  EXPECT_EQ(h(1, 2), cplx(0.5 * omega2, 0.0));
  const auto a = h_rydberg_rydberg(seg, {z0, v}, seg.t_start);
  const auto b = h_rydberg_rydberg(seg, {z0, v}, seg.t_end() * (1 - 1e-15));
  const double advance = std::arg(b(1, 2) / a(1, 2));
  EXPECT_NEAR(wrap_phase(advance - kw * v * seg.duration), 0.0, 1e-6);
  EXPECT_THROW(h_single_ground_rydberg(seg, {}, 2e-7), std::invalid_argument);
}

TEST(TwoAtomHamiltonian, DiagonalAndHermiticity) {
  const auto g = working_schedule();
  const auto set = default_interactions();
  const auto m = two_atom_model(g, {1e-6, 0.3}, {-2e-6, -0.1}, set);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0.0, g.t_gate);
  for (int i = 0; i < 100; ++i) {
    const auto h = m.matrix(t(rng));
    EXPECT_LE(max_hermitian_defect(h), 1e-14);
    EXPECT_EQ(h(idx(Level::r1, Level::r1), idx(Level::r1, Level::r1)), cplx(set.v11));
    EXPECT_EQ(h(idx(Level::r1, Level::r2), idx(Level::r1, Level::r2)), cplx(set.v12));
    EXPECT_EQ(h(idx(Level::r2, Level::r1), idx(Level::r2, Level::r1)), cplx(set.v12));
    EXPECT_EQ(h(idx(Level::r2, Level::r2), idx(Level::r2, Level::r2)), cplx(set.v22));
    for (int s : {4, 5, 6, 7, 8}) EXPECT_EQ(h(s, s), cplx(0.0));
  }
  const auto off = two_atom_model(g, {}, {}, InteractionSet::none());
  EXPECT_TRUE(off.matrix(2.0 * g.t_gate).isZero(0.0));
}

TEST(TwoAtomHamiltonian, FirstPulseCouplesOnlyControlGround) {
  const auto g = working_schedule();
  const auto h = h_two_atom(g, {}, {}, InteractionSet::none(), 0.5 * g.t_pi);
  auto coupled = [](int r, int c) {
    for (Level spectator : {Level::ground, Level::r1, Level::r2}) {
      const int lo = idx(Level::ground, spectator), up = idx(Level::r1, spectator);
      if ((r == up && c == lo) || (r == lo && c == up)) return true;
    }
    return false;
  };
  for (int r = 0; r < two_atom_dim; ++r)
    for (int c = 0; c < two_atom_dim; ++c) {
      if (coupled(r, c)) EXPECT_NEAR(std::abs(h(r, c)), 0.5 * 1.35 * mhz, 1e-6);
      else EXPECT_EQ(h(r, c), cplx(0.0)) << r << "," << c;
    }
}

TEST(TwoAtomHamiltonian, WaitWindowBlockMatchesPrintedMatrix) {
  const auto g = working_schedule();
  const auto set = default_interactions();
  const TrajectoryParams c{2e-6, 0.17}, t{-1e-6, -0.23};
  const double kw = g.control_segments[1].wavevector, k = g.control_segments[0].wavevector;
  const double o2 = g.control_segments[1].rabi;
  const double o1p = g.target_segments[0].rabi, o2p = g.target_segments[1].rabi;
  // One time inside each target segment.
  for (const auto& seg : g.target_segments) {
    const double time = seg.t_start + 0.37 * seg.duration;
    const bool pi_stage = seg.transition == Transition::ground_r1;
    const cplx k2 = o2 * std::polar(1.0, kw * (c.z0 + c.v * time));
    const cplx k1p = pi_stage ? o1p * std::polar(1.0, k * (t.z0 + t.v * time)) : cplx(0.0);
    const cplx k2p = pi_stage ? cplx(0.0) : o2p * std::polar(1.0, kw * (t.z0 + t.v * time));
    CMatrix want(6, 6);
    want << 2 * set.v22, std::conj(k2), std::conj(k2p), 0, 0, 0,
        k2, 2 * set.v12, 0, std::conj(k2p), 0, 0,
        k2p, 0, 2 * set.v12, std::conj(k2), k1p, 0,
        0, k2p, k2, 2 * set.v11, 0, k1p,
        0, 0, std::conj(k1p), 0, 0, std::conj(k2),
        0, 0, 0, std::conj(k1p), k2, 0;
    want *= 0.5;
    const auto h = h_two_atom(g, c, t, set, time);
    EXPECT_LE((h.topLeftCorner(6, 6) - want).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_TRUE(h.topRightCorner(6, 3).isZero(0.0));
  }
}

TEST(TwoAtomHamiltonian, TensorSumOfSingleAtomDrives) {
  const auto g = working_schedule();
  const TrajectoryParams c{1e-6, 0.11}, t{4e-6, -0.31};
  const auto hc_model = single_atom_model(g.control_segments, Atom::control, c);
  const auto ht_model = single_atom_model(g.target_segments, Atom::target, t);
  const auto m = two_atom_model(g, c, t, InteractionSet::none());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> time(0.0, g.t_gate);
  for (int n = 0; n < 50; ++n) {
    const double ti = time(rng);
    const auto hc = hc_model.matrix(ti), ht = ht_model.matrix(ti), h = m.matrix(ti);
    for (int r = 0; r < two_atom_dim; ++r)
      for (int s = 0; s < two_atom_dim; ++s) {
        const auto [rc, rt] = two_atom_basis[static_cast<std::size_t>(r)];
        const auto [sc, st] = two_atom_basis[static_cast<std::size_t>(s)];
        cplx want = 0.0;
        if (rt == st) want += hc(static_cast<int>(rc), static_cast<int>(sc));
        if (rc == sc) want += ht(static_cast<int>(rt), static_cast<int>(st));
        EXPECT_EQ(h(r, s), want);
      }
  }
}

TEST(Evolve, ZeroHamiltonianIsIdentity) {
  const HamiltonianModel m{BasisKind::single_atom, Eigen::VectorXd::Zero(3), {}};
  StateVector psi{BasisKind::single_atom, CVector(3)};
  psi.amplitudes << cplx(0.6, 0.0), cplx(0.0, 0.8), 0.0;
  for (auto method : {IntegratorMethod::rk4, IntegratorMethod::exact}) {
    IntegratorConfig cfg;
    cfg.method = method;
    EXPECT_EQ(evolve(m, psi, 0.0, 1e-6, cfg).amplitudes, psi.amplitudes);
  }
}

TEST(Evolve, RejectsOversizedStep) {
  const auto seg = make_segment(Atom::control, Transition::ground_r1, mhz, 5e6, 0.0, pi);
  const auto m = single_atom_model({seg}, Atom::control, {});
  IntegratorConfig cfg;
  cfg.step_size = 1e-9;  // ||H|| dt ≈ 3e-3
  EXPECT_THROW(evolve(m, StateVector::basis_state(BasisKind::single_atom, 0), 0.0, seg.duration, cfg), ConfigError);
  cfg.step_size = 1e-10;
  EXPECT_NO_THROW(evolve(m, StateVector::basis_state(BasisKind::single_atom, 0), 0.0, seg.duration, cfg));
  EXPECT_THROW(evolve(m, StateVector::basis_state(BasisKind::two_atom, 0), 0.0, seg.duration, cfg), ConfigError);
}

TEST(Evolve, MatchesClosedFormOnRandomSegments) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> omega(0.1, 3.0), v(-0.5, 0.5), z(-1e-5, 1e-5), area(0.1, 4.0 * pi),
      start(0.0, 1e-6), mix(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const bool ryd = i % 2;
    const double om = omega(rng) * mhz, k = ryd ? 1.25e7 : 5.06e6;
    const auto seg =
        make_segment(Atom::control, ryd ? Transition::r1_r2 : Transition::ground_r1, om, k, start(rng), pi);
    auto custom = seg;
    custom.pulse_area = area(rng);
    custom.duration = custom.pulse_area / om;
    const TrajectoryParams traj{z(rng), v(rng)};
    const auto m = single_atom_model({custom}, Atom::control, traj);
    // Two-level subspace: (lower, upper) = (g, r1) or (r2, r1).
    const int lo = ryd ? 2 : 0, up = 1;
    const double a = std::sqrt(mix(rng));
    StateVector psi{BasisKind::single_atom, CVector::Zero(3)};
    psi.amplitudes(lo) = a;
    psi.amplitudes(up) = std::polar(std::sqrt(1 - a * a), 0.7);
    const auto u = constant_detuning_propagator(om, k * traj.v, custom.duration, k * (traj.z0 + traj.v * custom.t_start));
    const Eigen::Vector2cd want = u * Eigen::Vector2cd(psi.amplitudes(lo), psi.amplitudes(up));
    for (auto method : {IntegratorMethod::rk4, IntegratorMethod::exact}) {
      IntegratorConfig cfg;
      cfg.method = method;
      const auto out = evolve(m, psi, custom.t_start, custom.t_end(), cfg);
      EXPECT_LE(std::abs(out.amplitudes(lo) - want(0)), 1e-9);
      EXPECT_LE(std::abs(out.amplitudes(up) - want(1)), 1e-9);
      EXPECT_LE(std::abs(out.norm() - 1.0), 1e-9);
    }
  }
}

TEST(Evolve, PiPulsePhaseLaw) {
  const double k = 5.055e6;
  for (double f : {1.0, 0.5, 0.2}) {
    const double omega = f * mhz;
    const auto seg = make_segment(Atom::control, Transition::ground_r1, omega, k, 0.0, pi);
    for (double ratio : {0.0, 0.05, 0.3, 0.7, 1.0}) {
      const double v = ratio * omega / k;
      for (double z0 : {0.0, 2.3e-6}) {
        const auto psi = evolve(single_atom_model({seg}, Atom::control, {z0, v}),
                                StateVector::basis_state(BasisKind::single_atom, 0), 0.0, seg.duration, {});
        const double measured = std::arg(psi.amplitudes(1)) + 0.5 * pi - k * z0;
        EXPECT_NEAR(wrap_phase(measured - phase_after_pi(k, 0.0, v, omega) - 0.5 * pi), 0.0, 1e-8);
        EXPECT_NEAR(std::norm(psi.amplitudes(1)), rabi_population(omega, k * v, seg.duration), 1e-9);
      }
    }
  }
}

TEST(Evolve, RichardsonSelfCheckOnSingleAtomGate) {
  const auto g = working_schedule();
  IntegratorConfig cfg;
  cfg.richardson_check = true;
  const auto m = single_atom_model(g.control_segments, Atom::control, {0.0, 0.2});
  const auto ev = evolve_tracked(m, StateVector::basis_state(BasisKind::single_atom, 0), 0.0, g.t_gate, cfg);
  EXPECT_LE(ev.richardson_delta, 1e-10);
  EXPECT_GT(ev.steps, 0);
}

TEST(Evolve, ExactAndRk4AgreeOnTwoAtomGate) {
  const auto g = working_schedule();
  const auto m = two_atom_model(g, {0.0, 0.21}, {1e-6, -0.12}, default_interactions());
  const auto psi0 = StateVector::basis_state(BasisKind::two_atom, idx(Level::ground, Level::ground));
  const auto track = single_rydberg_levels(BasisKind::two_atom);
  const auto rk = evolve_tracked(m, psi0, 0.0, g.t_gate, {}, track);
  const auto ex = evolve_tracked(m, psi0, 0.0, g.t_gate, exact_config(), track);
  EXPECT_LE((rk.state.amplitudes - ex.state.amplitudes).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(std::abs(rk.state.norm() - 1.0), 1e-9);
  EXPECT_LE(std::abs(ex.state.norm() - 1.0), 1e-12);
  EXPECT_NEAR(rk.residence / ex.residence, 1.0, 1e-6);
}

TEST(SimulateInput, UndrivenInputIsIdentity) {
  const auto r = simulate_input(InputState::q00, working_schedule(), {}, {}, default_interactions(), {});
  EXPECT_EQ(r.state.basis, BasisKind::undriven);
  EXPECT_EQ(r.state.computational_amplitude(), cplx(1.0));
  EXPECT_EQ(r.rydberg_residence, 0.0);
}

TEST(SimulateInput, ControlAtRestReturnsMinusOne) {
  const auto g = working_schedule();
  for (auto cfg : {IntegratorConfig{}, exact_config()}) {
    const auto r = simulate_input(InputState::q10, g, {}, {}, default_interactions(), cfg);
    EXPECT_LE(std::abs(r.state.computational_amplitude() + 1.0), 1e-6);
    // Half a π pulse on each side plus the whole wait window in r1/r2.
    EXPECT_NEAR(r.rydberg_residence / (g.t_wait + g.t_pi), 1.0, 1e-6);
  }
}

TEST(SimulateInput, TargetAtRestReturnsMinusOne) {
  const auto g = working_schedule();
  const auto r = simulate_input(InputState::q01, g, {}, {}, default_interactions(), exact_config());
  EXPECT_LE(std::abs(r.state.computational_amplitude() + 1.0), 1e-6);
  const double t_pi_target = g.target_segments[0].duration;
  EXPECT_NEAR(r.rydberg_residence / (g.t_wait - t_pi_target), 1.0, 1e-9);
}

// The linear Doppler phase cancels under the resonance condition and the
// conjugation symmetry v -> -v removes the quadratic phase, so the first
// surviving term of <10|psi> + 1 is cubic in kv/Omega1.
TEST(SimulateInput, DopplerResidualIsThirdOrder) {
  const auto g = working_schedule();
  const double k = g.control_segments[0].wavevector, omega1 = g.control_segments[0].rabi;
  auto deviation = [&](const GateSchedule& s, double v) {
    const auto r = simulate_input(InputState::q10, s, {0.0, v}, {}, InteractionSet::none(), exact_config());
    return std::abs(r.state.computational_amplitude() - std::polar(1.0, -3.0 * pi));
  };
  for (double x : {0.05, 0.02, 0.01}) {
    const double v = x * omega1 / k;
    const double ratio = deviation(g, v) / deviation(g, 0.5 * v);
    EXPECT_GT(ratio, 7.5) << x;
    EXPECT_LT(ratio, 8.5) << x;
  }
  // Off resonance the phase kw v t_w/2 no longer matches k v (t_w + t_pi)/2.
  auto detuned = g;
  detuned.control_segments[1].wavevector *= 1.05;
  for (double x : {0.02, 0.01}) {
    const double v = x * omega1 / k;
    const double ratio = deviation(detuned, v) / deviation(detuned, 0.5 * v);
    EXPECT_GT(ratio, 1.8) << x;
    EXPECT_LT(ratio, 2.2) << x;
  }
}

TEST(SimulateInput, BlockadeShiftFallsAsInverseInteraction) {
  const auto g = working_schedule();
  auto run = [&](double scale) {
    auto set = default_interactions();
    set.v11 *= scale;
    set.v12 *= scale;
    set.v22 *= scale;
    return run_gate(g, {}, {}, set, exact_config());
  };
  for (double s : {8.0, 16.0, 32.0, 64.0}) {
    const auto a = run(s), b = run(2.0 * s);
    const double ratio = wrap_phase(std::arg(a.gate.c) - pi) / wrap_phase(std::arg(b.gate.c) - pi);
    EXPECT_NEAR(ratio, 2.0, 0.02) << s;
    // E_ro follows (Omega/V)^2 up to an oscillating prefactor.
    EXPECT_GT(a.e_ro * s * s, 2e-5) << s;
    EXPECT_LT(a.e_ro * s * s, 1.5e-4) << s;
    EXPECT_GT(std::abs(a.gate.c), 1.0 - 1e-5);
  }
}
