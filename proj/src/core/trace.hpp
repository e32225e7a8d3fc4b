#pragma once

#include <string>
#include <vector>

namespace fhasel {

// Uniformly sampled voltage trace.
struct SignalTrace {
  std::vector<double> samples;  // V
  double fs = 0.0;              // Hz
  double t0 = 0.0;              // s, time of samples[0]

  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / fs; }
  void validate(const char* what) const;
};

enum class FeatureKind { voltage, impedance };

const char* to_string(FeatureKind k);
FeatureKind feature_kind_from_string(const std::string& s);

// Derived per-window feature stream (RMS voltages, impedance magnitudes, ...).
struct FeatureStream {
  std::vector<double> values;
  double rate = 0.0;  // Hz
  double t0 = 0.0;    // s, time of values[0] (stamped at window centers)
  FeatureKind kind = FeatureKind::voltage;

  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / rate; }
};

// Fixed-format writers. 9 significant digits, '.' decimal separator, so a
// given run always serializes to identical bytes.
std::string format_sig9(double v);
std::string format_sig12(double v);

void write_trace_csv(const std::string& path, const SignalTrace& trace);
void write_feature_csv(const std::string& path, const FeatureStream& stream);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace fhasel
