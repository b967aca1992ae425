#pragma once

// π–2Nπ–π pulse schedules for the control/target pair, the resonance
// condition that ties their Rabi magnitudes to the two wavevectors, and the
// single-Rydberg-level comparator gate.

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rydgate/constants.hpp"
#include "rydgate/error.hpp"
#include "rydgate/numfmt.hpp"

namespace rydgate {

enum class Atom { control, target };
enum class Transition { ground_r1, r1_r2 };
enum class Protocol { pipulse, traditional };

inline std::string_view to_string(Atom a) { return a == Atom::control ? "control" : "target"; }
inline std::string_view to_string(Transition t) { return t == Transition::ground_r1 ? "ground_r1" : "r1_r2"; }
inline std::string_view to_string(Protocol p) { return p == Protocol::pipulse ? "pipulse" : "traditional"; }

inline Atom parse_atom(std::string_view s) {
  if (s == "control") return Atom::control;
  if (s == "target") return Atom::target;
  throw ConfigError("unknown atom '" + std::string(s) + "'");
}
inline Transition parse_transition(std::string_view s) {
  if (s == "ground_r1") return Transition::ground_r1;
  if (s == "r1_r2") return Transition::r1_r2;
  throw ConfigError("unknown transition '" + std::string(s) + "'");
}
inline Protocol parse_protocol(std::string_view s) {
  if (s == "pipulse") return Protocol::pipulse;
  if (s == "traditional") return Protocol::traditional;
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

/// Relative tolerance on pulse areas and on schedule boundary coincidences.
inline constexpr double schedule_rel_tol = 1e-12;

struct PulseSegment {
  Atom atom = Atom::control;
  Transition transition = Transition::ground_r1;
  double rabi = 0.0;        // rad/s
  double wavevector = 0.0;  // rad/m
  double t_start = 0.0;     // s
  double duration = 0.0;    // s
  double pulse_area = 0.0;  // rad

  double t_end() const { return t_start + duration; }
  bool active_at(double t) const { return t >= t_start && t < t_end(); }

  /// Number of full 2π loops, or 0 for a π pulse.
  int loops() const {
    const double n = pulse_area / two_pi;
    const long r = std::lround(n);
    return (r >= 1 && std::abs(n - static_cast<double>(r)) <= schedule_rel_tol * n) ? static_cast<int>(r) : 0;
  }
};

inline bool is_pi_area(double area) { return std::abs(area - pi) <= schedule_rel_tol * pi; }

inline PulseSegment make_segment(Atom atom, Transition transition, double rabi, double wavevector,
                                 double t_start, double pulse_area) {
  if (!(rabi > 0.0) || !std::isfinite(rabi)) throw ScheduleError("Rabi magnitude must be positive");
  PulseSegment s{atom, transition, rabi, wavevector, t_start, pulse_area / rabi, pulse_area};
  if (!is_pi_area(pulse_area) && s.loops() == 0)
    throw ScheduleError("pulse area must be pi or 2N*pi");
  return s;
}

struct ProtocolParams {
  double omega1 = 0.0;  // rad/s, control ground-Rydberg
  double omega2 = 0.0;  // rad/s, control Rydberg-Rydberg
  int n_loops = 2;      // N of the control 2Nπ pulse
  double k = 0.0;       // rad/m
  double kw = 0.0;      // rad/m

  double ratio() const { return kw / k; }
};

/// Ω2 = NΩ1(kw/k − 2), the unique Ω2 satisfying kw/k = 2 + Ω2/(NΩ1).
inline ProtocolParams solve_condition(double omega1, int n_loops, double k, double kw) {
  if (!(omega1 > 0.0)) throw DomainError("omega1 must be positive");
  if (n_loops < 1) throw DomainError("loop count must be >= 1");
  if (!(k > 0.0) || !(kw > 0.0)) throw DomainError("wavevectors must be positive");
  const double excess = kw / k - 2.0;
  if (!(excess > 0.0)) throw InfeasibleScheme("kw/k must exceed 2 (got " + format_g17(kw / k) + ")");
  return {omega1, n_loops * omega1 * excess, n_loops, k, kw};
}

struct GateTiming {
  double t_pi = 0.0;    // π/Ω1
  double t_wait = 0.0;  // control 2Nπ window
  double t_gate = 0.0;  // 2 t_pi + t_wait
};

inline GateTiming gate_time(const ProtocolParams& p) {
  if (!(p.kw > 2.0 * p.k)) throw InfeasibleScheme("gate time undefined for kw/k <= 2");
  GateTiming t;
  t.t_pi = pi / p.omega1;
  t.t_gate = (two_pi / p.omega1) * (p.kw - p.k) / (p.kw - 2.0 * p.k);
  t.t_wait = t.t_gate * p.k / (p.kw - p.k);
  return t;
}

struct TargetRabi {
  double omega1_prime = 0.0;
  double omega2_prime = 0.0;
};

/// Target Rabi pair that runs a π–2N′π–π sequence filling exactly the control
/// wait window while itself satisfying the resonance condition.
inline TargetRabi derive_target_rabi(const ProtocolParams& p, int n_target = 2) {
  if (!(p.kw > 2.0 * p.k)) throw InfeasibleScheme("target Rabi undefined for kw/k <= 2");
  if (n_target < 1) throw DomainError("target loop count must be >= 1");
  TargetRabi r;
  r.omega1_prime = p.omega1 * (p.kw - p.k) / p.k;
  r.omega2_prime = n_target * r.omega1_prime * (p.kw - 2.0 * p.k) / p.k;
  return r;
}

struct GateSchedule {
  Protocol protocol = Protocol::pipulse;
  std::vector<PulseSegment> control_segments;
  std::vector<PulseSegment> target_segments;
  double t_pi = 0.0;
  double t_wait = 0.0;
  double t_gate = 0.0;
  int n_control = 0;
  int n_target = 0;

  double wait_begin() const { return t_pi; }
  double wait_end() const { return t_pi + t_wait; }

  std::vector<PulseSegment> all_segments() const {
    auto out = control_segments;
    out.insert(out.end(), target_segments.begin(), target_segments.end());
    return out;
  }

  void validate() const;
};

namespace detail {

inline bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

inline void check_no_overlap(const std::vector<PulseSegment>& segs, double scale) {
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i].t_start < segs[i - 1].t_end() - 1e-12 * scale)
      throw ScheduleError("segments on the same atom overlap");
}

}  // namespace detail

inline void GateSchedule::validate() const {
  if (!(t_gate > 0.0) || !std::isfinite(t_gate)) throw ScheduleError("gate duration must be positive");
  if (!(t_wait > 0.0) || !(t_pi > 0.0)) throw ScheduleError("empty schedule");
  if (!detail::close(t_gate, 2.0 * t_pi + t_wait, t_gate)) throw ScheduleError("t_gate != 2 t_pi + t_wait");
  const double s = t_gate;
  for (const auto& seg : control_segments)
    if (seg.atom != Atom::control) throw ScheduleError("target segment in control list");
  for (const auto& seg : target_segments) {
    if (seg.atom != Atom::target) throw ScheduleError("control segment in target list");
    if (seg.t_start < wait_begin() - 1e-12 * s || seg.t_end() > wait_end() + 1e-12 * s)
      throw ScheduleError("target segment outside the wait window");
  }
  detail::check_no_overlap(control_segments, s);
  detail::check_no_overlap(target_segments, s);

  const auto& c = control_segments;
  if (protocol == Protocol::pipulse) {
    if (c.size() != 3) throw ScheduleError("pi-2N*pi-pi control needs three segments");
    if (!is_pi_area(c[0].pulse_area) || !is_pi_area(c[2].pulse_area) || c[1].loops() == 0)
      throw ScheduleError("control areas must be pi, 2N*pi, pi");
    if (!detail::close(c[0].t_start, 0.0, s) || !detail::close(c[1].t_start, t_pi, s) ||
        !detail::close(c[1].t_end(), wait_end(), s) || !detail::close(c[2].t_end(), t_gate, s))
      throw ScheduleError("control segments do not tile [0, t_gate]");
  } else {
    if (c.size() != 2) throw ScheduleError("traditional control needs two pi pulses");
    if (!is_pi_area(c[0].pulse_area) || !is_pi_area(c[1].pulse_area))
      throw ScheduleError("traditional control areas must be pi, pi");
    if (!detail::close(c[0].t_start, 0.0, s) || !detail::close(c[1].t_start, wait_end(), s) ||
        !detail::close(c[1].t_end(), t_gate, s))
      throw ScheduleError("traditional control pulses misplaced");
  }
}

/// Control: π on [0, t_π), 2Nπ on the wait window, π to t_gate. Target:
/// π–2N′π–π packed into the wait window, N′ even.
inline GateSchedule build_gate_schedule(const ProtocolParams& p, int n_target = 2) {
  if (n_target < 2 || n_target % 2 != 0)
    throw ScheduleError("target loop count must be even (got " + std::to_string(n_target) + ")");
  if (p.n_loops < 1) throw ScheduleError("control loop count must be >= 1");
  if (!(p.omega1 > 0.0) || !(p.omega2 > 0.0)) throw ScheduleError("Rabi magnitudes must be positive");
  const double condition = 2.0 + p.omega2 / (p.n_loops * p.omega1);
  if (std::abs(condition - p.ratio()) > 1e-12 * p.ratio())
    throw ScheduleError("parameters violate kw/k = 2 + omega2/(N omega1)");

  const auto timing = gate_time(p);
  const auto target = derive_target_rabi(p, n_target);
  GateSchedule g;
  g.protocol = Protocol::pipulse;
  g.t_pi = timing.t_pi;
  g.t_wait = 2.0 * pi * p.n_loops / p.omega2;
  g.t_gate = 2.0 * g.t_pi + g.t_wait;
  g.n_control = p.n_loops;
  g.n_target = n_target;
  if (!(g.t_gate > 0.0) || !std::isfinite(g.t_gate)) throw ScheduleError("zero-duration gate");

  g.control_segments = {
      make_segment(Atom::control, Transition::ground_r1, p.omega1, p.k, 0.0, pi),
      make_segment(Atom::control, Transition::r1_r2, p.omega2, p.kw, g.t_pi, two_pi * p.n_loops),
      make_segment(Atom::control, Transition::ground_r1, p.omega1, p.k, g.wait_end(), pi),
  };

  const double tp = pi / target.omega1_prime;
  const double tl = two_pi * n_target / target.omega2_prime;
  if (std::abs(2.0 * tp + tl - g.t_wait) > 1e-9 * g.t_wait)
    throw ScheduleError("target sequence does not fit the wait window");
  g.target_segments = {
      make_segment(Atom::target, Transition::ground_r1, target.omega1_prime, p.k, g.wait_begin(), pi),
      make_segment(Atom::target, Transition::r1_r2, target.omega2_prime, p.kw, g.wait_begin() + tp,
                   two_pi * n_target),
      // Anchored to the window end so the last boundary coincides with the control's.
      make_segment(Atom::target, Transition::ground_r1, target.omega1_prime, p.k, g.wait_end() - tp, pi),
  };
  g.validate();
  return g;
}

/// Control π, idle gap of length t_wait, π; target single 2π pulse centred
/// in the gap. All drives use |g> <-> |r1> with wavevector k.
inline GateSchedule build_traditional_schedule(double omega, double t_wait, double k) {
  if (!(omega > 0.0)) throw ScheduleError("Rabi magnitude must be positive");
  if (!(t_wait > 0.0)) throw ScheduleError("zero-duration wait window");
  const double t_2pi = two_pi / omega;
  if (t_2pi > t_wait * (1.0 + schedule_rel_tol))
    throw ScheduleError("target 2pi pulse longer than the wait window");
  GateSchedule g;
  g.protocol = Protocol::traditional;
  g.t_pi = pi / omega;
  g.t_wait = t_wait;
  g.t_gate = 2.0 * g.t_pi + t_wait;
  g.n_control = 0;
  g.n_target = 1;
  g.control_segments = {
      make_segment(Atom::control, Transition::ground_r1, omega, k, 0.0, pi),
      make_segment(Atom::control, Transition::ground_r1, omega, k, g.wait_end(), pi),
  };
  const double start = g.wait_begin() + std::max(0.0, 0.5 * (t_wait - t_2pi));
  g.target_segments = {make_segment(Atom::target, Transition::ground_r1, omega, k, start, two_pi)};
  g.validate();
  return g;
}

// Text serialisation ----------------------------------------------------------

inline void write_schedule(std::ostream& out, const GateSchedule& g) {
  out << "# protocol=" << to_string(g.protocol) << '\n'
      << "# t_pi_s=" << format_g17(g.t_pi) << '\n'
      << "# t_wait_s=" << format_g17(g.t_wait) << '\n'
      << "# t_gate_s=" << format_g17(g.t_gate) << '\n'
      << "# n_control=" << g.n_control << '\n'
      << "# n_target=" << g.n_target << '\n'
      << "atom,transition,rabi_rad_per_s,wavevector_rad_per_m,t_start_s,duration_s\n";
  for (const auto& s : g.all_segments()) {
    out << to_string(s.atom) << ',' << to_string(s.transition) << ',' << format_g17(s.rabi) << ','
        << format_g17(s.wavevector) << ',' << format_g17(s.t_start) << ',' << format_g17(s.duration)
        << '\n';
  }
}

inline std::string schedule_to_string(const GateSchedule& g) {
  std::ostringstream os;
  write_schedule(os, g);
  return os.str();
}

inline GateSchedule read_schedule(std::istream& in) {
  GateSchedule g;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = trim(std::string_view(line).substr(1, eq - 1));
      const auto value = std::string_view(line).substr(eq + 1);
      if (key == "protocol") g.protocol = parse_protocol(trim(value));
      else if (key == "t_pi_s") g.t_pi = parse_double(value);
      else if (key == "t_wait_s") g.t_wait = parse_double(value);
      else if (key == "t_gate_s") g.t_gate = parse_double(value);
      else if (key == "n_control") g.n_control = static_cast<int>(parse_long(value));
      else if (key == "n_target") g.n_target = static_cast<int>(parse_long(value));
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split_list(line);
    if (f.size() != 6) throw ConfigError("schedule record needs 6 fields: " + line);
    PulseSegment s;
    s.atom = parse_atom(f[0]);
    s.transition = parse_transition(f[1]);
    s.rabi = parse_double(f[2]);
    s.wavevector = parse_double(f[3]);
    s.t_start = parse_double(f[4]);
    s.duration = parse_double(f[5]);
    s.pulse_area = s.rabi * s.duration;
    (s.atom == Atom::control ? g.control_segments : g.target_segments).push_back(s);
  }
  g.validate();
  return g;
}

}  // namespace rydgate
