#include "waveforms.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace fhasel {

namespace {

constexpr double k_two_pi = 2.0 * std::numbers::pi;

// Mixed composite: a square-wave step block, then sine blocks of rising
// frequency at the scenario's sine amplitude/offset.
struct Segment {
  double dur;
  bool square;
  double amp, offset, freq;
};

std::vector<Segment> composite_segments(const ScenarioSpec& s) {
  return {
      {4.0, true, 2.0, 2.5, 0.5},
      {4.0, false, s.amplitude_kv, s.offset_kv, 0.5},
      {3.0, false, s.amplitude_kv, s.offset_kv, 1.0},
      {2.0, false, s.amplitude_kv, s.offset_kv, 2.0},
      {2.0, false, s.amplitude_kv, s.offset_kv, 5.0},
  };
}

double raised_cosine(double theta_max_deg, double phase_rad) {
  return theta_max_deg * 0.5 * (1.0 - std::cos(phase_rad));
}

}  // namespace

double scenario_duration(const ScenarioSpec& s) {
  switch (s.actuation) {
    case Actuation::mixed_step_sine: {
      double total = s.settle_s;
      for (const Segment& seg : composite_segments(s)) total += seg.dur;
      return total;
    }
    case Actuation::joints:
      return s.joints.duration_s;
    default:
      return s.duration_s;
  }
}

DrivePlan build_drive(const ScenarioSpec& s, double fs) {
  if (!(fs > 0.0)) throw validation_error("build_drive: fs must be > 0");
  const double duration = scenario_duration(s);
  const std::size_t n = static_cast<std::size_t>(std::llround(duration * fs));
  if (n < 2) throw validation_error("build_drive: run too short");

  DrivePlan plan;
  plan.drive_kv.fs = fs;
  plan.drive_kv.t0 = 0.0;
  plan.drive_kv.samples.resize(n);
  plan.f_ext_n.assign(n, s.f_ext_n);

  const double sign = s.negate_drive ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = 0.0;
    switch (s.actuation) {
      case Actuation::sine: {
        if (t >= s.settle_s) {
          v = s.offset_kv + s.amplitude_kv * std::sin(k_two_pi * s.freq_hz * (t - s.settle_s));
        }
        break;
      }
      case Actuation::step: {
        if (t >= s.settle_s) {
          const double ph = std::sin(k_two_pi * s.freq_hz * (t - s.settle_s));
          v = s.offset_kv + (ph >= 0.0 ? s.amplitude_kv : -s.amplitude_kv);
        }
        break;
      }
      case Actuation::const_load_step: {
        if (t >= s.drive_on_s) v = s.offset_kv;
        if (t >= s.load_step_s) plan.f_ext_n[i] = s.f_ext_n + s.load_step_n;
        break;
      }
      case Actuation::mixed_step_sine: {
        if (t >= s.settle_s) {
          double local = t - s.settle_s;
          for (const Segment& seg : composite_segments(s)) {
            if (local < seg.dur) {
              const double ph = std::sin(k_two_pi * seg.freq * local);
              v = seg.square ? seg.offset + (ph >= 0.0 ? seg.amp : -seg.amp)
                             : seg.offset + seg.amp * ph;
              break;
            }
            local -= seg.dur;
          }
        }
        break;
      }
      case Actuation::joints: {
        // Joint sessions hold the drive the whole run; the joint moves the load.
        v = s.joints.v_hold_kv;
        break;
      }
    }
    plan.drive_kv.samples[i] = sign * v;
  }
  return plan;
}

double tension_of_angle(double theta_deg, const JointConfig& j) {
  if (!(theta_deg >= 0.0) || !std::isfinite(theta_deg)) {
    throw model_error("tension_of_angle: angle must be finite and >= 0");
  }
  const double theta_rad = theta_deg * std::numbers::pi / 180.0;
  return j.pretension_n + j.k_pull * j.r_joint_m * theta_rad;
}

JointTrajectory joint_calibration_trajectory(const JointConfig& j, double fs,
                                             double settle_s) {
  JointTrajectory tr;
  tr.names = {"hip_left", "knee_left", "hip_right", "knee_right"};
  tr.fs = fs;
  tr.duration_s = j.duration_s;
  const std::size_t n = static_cast<std::size_t>(std::llround(j.duration_s * fs));
  const double pulse = (j.duration_s - settle_s) / static_cast<double>(tr.names.size());
  tr.theta_deg.assign(tr.names.size(), std::vector<double>(n, 0.0));
  for (std::size_t joint = 0; joint < tr.names.size(); ++joint) {
    const double start = settle_s + pulse * static_cast<double>(joint);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t >= start && t < start + pulse) {
        tr.theta_deg[joint][i] =
            raised_cosine(j.theta_max_deg, k_two_pi * (t - start) / pulse);
      }
    }
  }
  return tr;
}

JointTrajectory joint_evaluation_trajectory(const JointConfig& j, double fs,
                                            double settle_s) {
  JointTrajectory tr;
  tr.names = {"hip_left", "knee_left", "hip_right", "knee_right"};
  tr.fs = fs;
  tr.duration_s = j.duration_s;
  const std::size_t n = static_cast<std::size_t>(std::llround(j.duration_s * fs));
  // Gait-like cycles: hips at a slow rate, knees at twice that, legs in
  // antiphase. Raised cosines stay inside [0, theta_max] for any phase.
  const double freqs[4] = {0.25, 0.5, 0.25, 0.5};
  const double phases[4] = {0.0, 0.5 * std::numbers::pi, std::numbers::pi,
                            1.5 * std::numbers::pi};
  tr.theta_deg.assign(tr.names.size(), std::vector<double>(n, 0.0));
  for (std::size_t joint = 0; joint < tr.names.size(); ++joint) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t < settle_s) continue;
      const double ph = k_two_pi * freqs[joint] * (t - settle_s) + phases[joint];
      // Fade the first second in so the tension does not jump at settle end.
      const double fade = std::min(1.0, t - settle_s);
      tr.theta_deg[joint][i] = fade * raised_cosine(j.theta_max_deg, ph);
    }
  }
  return tr;
}

}  // namespace fhasel
