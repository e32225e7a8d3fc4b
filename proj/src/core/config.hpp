#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actuator.hpp"
#include "circuit.hpp"
#include "estimation.hpp"
#include "calibration.hpp"
#include "mux.hpp"

namespace fhasel {

enum class Actuation { sine, step, const_load_step, mixed_step_sine, joints };
enum class Method { voltage, impedance };
enum class Mapping { single, dual };

const char* to_string(Actuation a);
const char* to_string(Method m);
const char* to_string(Mapping m);

// Joint-to-string geometry for the posture-tracking session: flexing a joint
// by dtheta lengthens the string path by r_joint * dtheta, which loads the
// held-at-v_hold actuator through the series elasticity of the pull chain.
struct JointConfig {
  double r_joint_m = 0.03;     // moment arm
  double k_pull = 21.5;        // N/m, series stiffness of the pull chain
  double pretension_n = 0.15;  // N at zero flexion
  double theta_max_deg = 90.0; // per-joint flexion limit, <= 135
  double v_hold_kv = 4.0;      // constant drive during the session
  double flexion_frac = 0.95;  // calibration must reach this fraction of theta_max
  double duration_s = 16.0;    // per pass
};

struct ScenarioSpec {
  std::string name = "default";
  Actuation actuation = Actuation::sine;
  double amplitude_kv = 1.0;
  double offset_kv = 3.5;
  double freq_hz = 1.0;
  double duration_s = 10.5;
  double settle_s = 0.5;
  std::uint64_t seed = 1234;
  Method method = Method::voltage;
  Mapping mapping = Mapping::single;
  double f_ext_n = 0.46876;      // hanging load during sine/step scenarios
  double drive_on_s = 0.5;       // const_load_step: drive switch-on time
  double load_step_n = 0.333;    // const_load_step: added tension
  double load_step_s = 6.0;      // const_load_step: when the load is added
  std::vector<double> sweep_freqs_hz = {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 10.0};
  std::vector<double> mux_freqs_hz = {1.0, 1.3, 1.7, 2.2};
  JointConfig joints;
  bool write_traces = false;
  bool negate_drive = false;
};

struct SimConfig {
  ActuatorParams actuator;
  CircuitParams circuit;
  RmsConfig estimation;
  FitOptions calibration;
  MuxPlan mux;
  ScenarioSpec scenario;

  // Full validation of every section plus cross-field constraints
  // (supply ceiling, window/period alignment, minimum durations).
  void validate() const;

  // Override one value, key = "section.key" in config-file syntax.
  void set(const std::string& key, const std::string& value);

  // Every effective setting in file order, for report metadata.
  std::vector<std::pair<std::string, std::string>> metadata() const;
};

// Parse the sectioned key=value format. Unknown sections or keys are
// validation errors; so are malformed numbers. Defaults fill whatever the
// file does not mention.
SimConfig parse_config_text(const std::string& text);
SimConfig load_config(const std::string& path);

}  // namespace fhasel
