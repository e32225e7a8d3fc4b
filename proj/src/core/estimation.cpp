#include "estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace fhasel {

void RmsConfig::validate() const {
  if (window < 2) throw validation_error("estimation: window must be >= 2 samples");
  if (!(vc_floor_v > 0.0) || !std::isfinite(vc_floor_v)) {
    throw validation_error("estimation: vc_floor_v must be > 0");
  }
  if (moving_average < 0) throw validation_error("estimation: moving_average must be >= 0");
}

namespace {

FeatureStream windowed_reduce(const SignalTrace& trace, const RmsConfig& cfg, bool rms) {
  cfg.validate();
  trace.validate("windowed feature input");
  const std::size_t w = static_cast<std::size_t>(cfg.window);
  const std::size_t n_windows = trace.samples.size() / w;
  FeatureStream out;
  out.rate = trace.fs / static_cast<double>(w);
  out.t0 = trace.t0 + (static_cast<double>(w) - 1.0) / (2.0 * trace.fs);
  out.kind = FeatureKind::voltage;
  out.values.resize(n_windows);
  for (std::size_t j = 0; j < n_windows; ++j) {
    double acc = 0.0;
    const double* block = trace.samples.data() + j * w;
    if (rms) {
      for (std::size_t i = 0; i < w; ++i) acc += block[i] * block[i];
      out.values[j] = std::sqrt(acc / static_cast<double>(w));
    } else {
      for (std::size_t i = 0; i < w; ++i) acc += block[i];
      out.values[j] = acc / static_cast<double>(w);
    }
  }
  return out;
}

}  // namespace

FeatureStream windowed_rms(const SignalTrace& trace, const RmsConfig& cfg) {
  return windowed_reduce(trace, cfg, true);
}

FeatureStream windowed_mean(const SignalTrace& trace, const RmsConfig& cfg) {
  return windowed_reduce(trace, cfg, false);
}

double impedance_magnitude(double v_h_rms, double v_c_rms, double r_c,
                           double vc_floor_v) {
  if (!std::isfinite(v_h_rms) || !std::isfinite(v_c_rms) || v_h_rms < 0.0) {
    throw model_error("impedance_magnitude: non-finite or negative RMS input");
  }
  if (!(r_c > 0.0)) throw model_error("impedance_magnitude: r_c must be > 0");
  if (v_c_rms <= vc_floor_v) {
    throw model_error("impedance_magnitude: v_c below noise floor, impedance undefined");
  }
  return v_h_rms * r_c / v_c_rms;
}

FeatureStream impedance_stream(const FeatureStream& v_h_rms,
                               const FeatureStream& v_c_rms, double r_c,
                               double vc_floor_v) {
  if (v_h_rms.values.size() != v_c_rms.values.size() || v_h_rms.rate != v_c_rms.rate) {
    throw model_error("impedance_stream: RMS streams must share length and rate");
  }
  FeatureStream out;
  out.rate = v_h_rms.rate;
  out.t0 = v_h_rms.t0;
  out.kind = FeatureKind::impedance;
  out.values.resize(v_h_rms.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = impedance_magnitude(v_h_rms.values[i], v_c_rms.values[i], r_c,
                                        vc_floor_v);
  }
  return out;
}

double capacitance_from_impedance(double z_mag, double r_e, double f) {
  if (!std::isfinite(z_mag) || !std::isfinite(r_e) || !(f > 0.0)) {
    throw model_error("capacitance_from_impedance: non-finite input or f <= 0");
  }
  if (z_mag <= r_e) {
    throw model_error(
        "capacitance_from_impedance: |Z| must exceed r_e (capacitive part vanished)");
  }
  const double reactance = std::sqrt(z_mag * z_mag - r_e * r_e);
  return 1.0 / (2.0 * std::numbers::pi * f * reactance);
}

FeatureStream voltage_feature(const FeatureStream& v_h_rms) {
  FeatureStream out = v_h_rms;
  out.kind = FeatureKind::voltage;
  return out;
}

FeatureStream moving_average(const FeatureStream& in, int k) {
  if (k < 1) throw model_error("moving_average: k must be >= 1");
  if (k == 1 || in.values.empty()) return in;
  FeatureStream out = in;
  const int n = static_cast<int>(in.values.size());
  const int half = k / 2;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + (k - 1 - half));
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += in.values[j];
    out.values[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace fhasel
