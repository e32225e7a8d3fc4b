#pragma once

#include <span>

#include "trace.hpp"

namespace fhasel {

struct RmsConfig {
  int window = 200;           // samples per non-overlapping window
  double vc_floor_v = 1e-6;   // below this, v_c carries no usable signal
  int moving_average = 0;     // extra feature smoothing, 0 disables

  void validate() const;
};

// Non-overlapping RMS windows; a trailing partial window is discarded.
// Feature timestamps sit at window centers.
FeatureStream windowed_rms(const SignalTrace& trace, const RmsConfig& cfg);

// Same windowing, arithmetic mean. Used to align ground truth with features.
FeatureStream windowed_mean(const SignalTrace& trace, const RmsConfig& cfg);

// |Z| = v_h_rms * r_c / v_c_rms. Error when v_c_rms is at or below the floor.
double impedance_magnitude(double v_h_rms, double v_c_rms, double r_c,
                           double vc_floor_v);

// Per-window |Z| stream from the two RMS streams.
FeatureStream impedance_stream(const FeatureStream& v_h_rms,
                               const FeatureStream& v_c_rms, double r_c,
                               double vc_floor_v);

// C_E = 1 / (2 pi f sqrt(|Z|^2 - r_e^2)). Error when |Z| <= r_e.
double capacitance_from_impedance(double z_mag, double r_e, double f);

// Identity passthrough tagged as the voltage-method feature.
FeatureStream voltage_feature(const FeatureStream& v_h_rms);

// Centered moving average over k windows (k >= 1; k = 1 is a copy).
FeatureStream moving_average(const FeatureStream& in, int k);

}  // namespace fhasel
