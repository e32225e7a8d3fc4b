#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "trace.hpp"

namespace fhasel {

// Per-sample drive voltage and external tensile load for one actuator.
struct DrivePlan {
  SignalTrace drive_kv;
  std::vector<double> f_ext_n;
};

// Effective run length. Composite scenarios own their segment layout; the
// joint session owns its own clock.
double scenario_duration(const ScenarioSpec& s);

// Drive + load for the single-actuator scenarios (sine, step, load step,
// mixed step/sine composite). The first settle_s seconds hold the drive at
// zero so the mechanical state starts from rest.
DrivePlan build_drive(const ScenarioSpec& s, double fs);

// Angle trajectories for the four tracked joints, sampled at fs.
struct JointTrajectory {
  std::vector<std::string> names;
  std::vector<std::vector<double>> theta_deg;  // [joint][sample]
  double fs = 0.0;
  double duration_s = 0.0;
};

// Calibration pass: one raised-cosine flexion pulse per joint in sequence,
// each reaching theta_max once, the rest of the time at zero.
JointTrajectory joint_calibration_trajectory(const JointConfig& j, double fs,
                                             double settle_s);

// Evaluation pass: all joints move at once on gait-like phase-shifted
// raised-cosine cycles at different rates.
JointTrajectory joint_evaluation_trajectory(const JointConfig& j, double fs,
                                            double settle_s);

// String geometry: tensile force pulled on the actuator at a joint angle.
// Tension = pretension + k_pull * r_joint * theta_rad.
double tension_of_angle(double theta_deg, const JointConfig& j);

}  // namespace fhasel
