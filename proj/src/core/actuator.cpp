#include "actuator.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace fhasel {

void ActuatorParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(c_full) || !finite(c_empty) || !(c_empty > 0.0) || !(c_full > c_empty)) {
    throw validation_error("actuator: need c_full > c_empty > 0");
  }
  if (!finite(q_max) || !(q_max > 0.0)) throw validation_error("actuator: q_max must be > 0");
  if (!finite(r_e) || !(r_e > 0.0)) throw validation_error("actuator: r_e must be > 0");
  if (!finite(mass) || mass < 0.0) throw validation_error("actuator: mass must be >= 0");
  if (!finite(stiffness) || stiffness < 0.0) {
    throw validation_error("actuator: stiffness must be >= 0");
  }
  if (!finite(damping) || damping < 0.0) throw validation_error("actuator: damping must be >= 0");
  if (!finite(k_f) || !(k_f > 0.0)) throw validation_error("actuator: k_f must be > 0");
  if (!finite(tau_c) || tau_c < 0.0) throw validation_error("actuator: tau_c must be >= 0");
  if (!finite(c_couple) || c_couple < 0.0) {
    throw validation_error("actuator: c_couple must be >= 0");
  }
  if (!finite(drift_f_per_s)) throw validation_error("actuator: drift rate must be finite");
  if (mass == 0.0 && damping == 0.0 && stiffness == 0.0) {
    throw validation_error("actuator: mass, damping and stiffness cannot all be zero");
  }
}

ActuatorState initial_state(const ActuatorParams& p) {
  ActuatorState s;
  s.c_e = p.c_full;
  return s;
}

double capacitance_of_displacement(double q, const ActuatorParams& p) {
  if (!std::isfinite(q)) throw model_error("capacitance_of_displacement: non-finite q");
  if (q < 0.0 || q > p.q_max) {
    throw model_error("capacitance_of_displacement: q outside [0, q_max]");
  }
  return p.c_full - (p.c_full - p.c_empty) * (q / p.q_max);
}

double electrostatic_force(double v_d_kv, const ActuatorParams& p) {
  if (!std::isfinite(v_d_kv)) throw model_error("electrostatic_force: non-finite drive");
  return p.k_f * v_d_kv * v_d_kv;
}

double kf_for_static_equilibrium(double stiffness, double load_n, double v_d_kv,
                                 double q_target) {
  if (!(v_d_kv > 0.0)) throw model_error("kf_for_static_equilibrium: drive must be > 0");
  return (stiffness * q_target + load_n) / (v_d_kv * v_d_kv);
}

ActuatorState step_dynamics(const ActuatorState& s, double v_d_kv, double f_ext_n,
                            double dt, const ActuatorParams& p) {
  if (!std::isfinite(v_d_kv) || !std::isfinite(f_ext_n) || !std::isfinite(dt)) {
    throw model_error("step_dynamics: non-finite input");
  }
  if (!(dt > 0.0)) throw model_error("step_dynamics: dt must be > 0");
  if (p.tau_c > 0.0 && dt > p.tau_c / 10.0 * (1.0 + 1e-12)) {
    throw model_error("step_dynamics: dt must be <= tau_c/10 to resolve the capacitance lag");
  }
  if (!std::isfinite(s.q) || !std::isfinite(s.q_dot) || !std::isfinite(s.c_e)) {
    throw model_error("step_dynamics: non-finite state");
  }

  ActuatorState out = s;
  const double f_net = electrostatic_force(v_d_kv, p) - p.stiffness * s.q -
                       p.damping * s.q_dot - f_ext_n;
  if (p.mass > 0.0) {
    out.q_dot = s.q_dot + dt * f_net / p.mass;
    out.q = s.q + dt * out.q_dot;
  } else if (p.damping > 0.0) {
    // Quasi-static limit, backward Euler keeps it stable for any dt.
    const double drive = electrostatic_force(v_d_kv, p) - f_ext_n;
    out.q = (s.q + dt * drive / p.damping) / (1.0 + dt * p.stiffness / p.damping);
    out.q_dot = (out.q - s.q) / dt;
  } else {
    out.q = (electrostatic_force(v_d_kv, p) - f_ext_n) / p.stiffness;
    out.q_dot = 0.0;
  }

  if (out.q <= 0.0) {
    out.q = 0.0;
    if (out.q_dot < 0.0) out.q_dot = 0.0;
  } else if (out.q >= p.q_max) {
    out.q = p.q_max;
    if (out.q_dot > 0.0) out.q_dot = 0.0;
  }

  out.t = s.t + dt;
  double c_target = capacitance_of_displacement(out.q, p);
  if (p.drift_f_per_s != 0.0) {
    c_target = std::clamp(c_target + p.drift_f_per_s * out.t, p.c_empty, p.c_full);
  }
  if (p.tau_c > 0.0) {
    out.c_e = c_target + (s.c_e - c_target) * std::exp(-dt / p.tau_c);
  } else {
    out.c_e = c_target;
  }
  out.c_e = std::clamp(out.c_e, p.c_empty, p.c_full);
  return out;
}

}  // namespace fhasel
