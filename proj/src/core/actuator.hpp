#pragma once

namespace fhasel {

// Lumped model of one folded-electrode actuator: a spring-mass-damper pulled
// by the quadratic electrostatic force of the driven pouch, with an affine map
// from contraction to sensing-electrode capacitance. The capacitance relaxes
// toward that map with a first-order lag (tau_c), which is what makes
// rate-dependent hysteresis emerge at high drive frequencies.
struct ActuatorParams {
  double c_full = 200e-12;   // F, sensing capacitance at q = 0
  double c_empty = 50e-12;   // F, sensing capacitance at q = q_max
  double q_max = 6e-3;       // m, full stroke
  double r_e = 100e3;        // ohm, series resistance of the sensing electrodes
  double mass = 0.0478;      // kg, suspended load
  double stiffness = 200.0;  // N/m
  double damping = 5.6;      // N*s/m
  double k_f = 0.0803;       // N/kV^2, electrostatic force coefficient
  double tau_c = 1.8e-3;     // s, capacitance lag; 0 disables
  double c_couple = 12e-12;  // F, lumped HV-to-sensing coupling capacitance
  double drift_f_per_s = 0.0;  // F/s, charge-retention drift hook, off by default

  void validate() const;  // throws validation_error
};

struct ActuatorState {
  double q = 0.0;      // m, contraction displacement, 0 = relaxed
  double q_dot = 0.0;  // m/s
  double c_e = 0.0;    // F, current sensing capacitance
  double t = 0.0;      // s
};

ActuatorState initial_state(const ActuatorParams& p);

// Affine capacitance map c(q). Domain error outside [0, q_max].
double capacitance_of_displacement(double q, const ActuatorParams& p);

// F = k_f * v_d^2, polarity agnostic. v_d in kV.
double electrostatic_force(double v_d_kv, const ActuatorParams& p);

// k_f sizing helper: value that puts the static equilibrium under load_n at
// q_target when driven at v_d_kv (k_f v^2 = stiffness q + load).
double kf_for_static_equilibrium(double stiffness, double load_n, double v_d_kv,
                                 double q_target);

// One semi-implicit Euler step of
//   mass q'' = electrostatic_force(v_d) - stiffness q - damping q' - f_ext,
// with q clamped to [0, q_max], followed by the exact exponential relaxation
// of c_e toward c(q). Positive f_ext is external tension, so raising it moves
// the equilibrium toward extension (smaller q).
ActuatorState step_dynamics(const ActuatorState& s, double v_d_kv, double f_ext_n,
                            double dt, const ActuatorParams& p);

}  // namespace fhasel
