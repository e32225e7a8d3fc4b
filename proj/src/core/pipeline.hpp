#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "config.hpp"
#include "mux.hpp"
#include "trace.hpp"
#include "waveforms.hpp"

namespace fhasel {

// One simulated acquisition: actuator dynamics, sensing-path transient,
// windowed features for both methods, window-aligned truth.
struct PassResult {
  FeatureStream voltage;    // RMS(v_h)
  FeatureStream impedance;  // capacitance recovered from |Z|
  FeatureStream truth;      // windowed mean of the truth samples
  // Heavy per-sample data, kept only when capture is requested.
  SignalTrace drive_kv;
  SignalTrace q_m;
  SensingFrame frames;
  bool captured = false;
};

// Simulates one pass. truth_samples defaults to the displacement q; joint
// sessions pass the commanded angle instead. The noise seed is the only
// difference between a calibration and an evaluation pass.
PassResult run_pass(const SimConfig& cfg, const SignalTrace& drive_kv,
                    std::span<const double> f_ext_n, std::uint64_t noise_seed,
                    std::span<const double> truth_samples = {}, bool capture = false);

const FeatureStream& method_feature(const PassResult& pass, Method m);

// Feature/truth pairs left after the settle cut.
struct AlignedSeries {
  std::vector<double> t, feature, truth;
  double rate = 0.0;
};

AlignedSeries trim_series(const FeatureStream& feature, const FeatureStream& truth,
                          double settle_s);

MuxChannelMap fit_map(const AlignedSeries& cal, Mapping mapping, FeatureKind kind,
                      const FitOptions& opt);

struct Evaluation {
  std::vector<double> t, estimate, truth;
  double nrmse = 0.0;
  double phase_deg = std::numeric_limits<double>::quiet_NaN();
};

// Causal evaluation of a fitted map. Estimates start after the slope-tracker
// warm-up for single and dual maps alike, so both mappings are scored over
// identical samples. f_act enables the phase-lag metric.
Evaluation evaluate_map(const MuxChannelMap& map, const AlignedSeries& eval,
                        const FitOptions& opt, double clamp_span,
                        std::optional<double> f_act);

struct ReportRow {
  std::string scenario;
  Method method = Method::voltage;
  Mapping mapping = Mapping::single;
  double freq_hz = 0.0;
  double nrmse = 0.0;
  double phase_deg = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::string csv() const;  // header + rows; metadata is written separately
};

// report.csv + metadata.csv under dir.
void write_report(const std::string& dir, const EvalReport& report);

struct ScenarioResult {
  EvalReport report;
  Evaluation eval;
};

// End-to-end single-actuator scenario: calibration pass on the scenario seed,
// evaluation pass on seed + 1, fit, causal estimation, metrics. out_dir ""
// skips file output.
ScenarioResult run_scenario(const SimConfig& cfg, const std::string& out_dir);

// Simulation only: drive, displacement, sensing traces and both feature
// streams as CSVs.
void simulate_only(const SimConfig& cfg, const std::string& out_dir);

// Fit on the calibration pass and save the map file.
void calibrate_only(const SimConfig& cfg, const std::string& map_path);

// One row per (frequency, method) over scenario.sweep_freqs_hz. Each
// frequency runs long enough to cover at least 10 periods.
EvalReport run_sweep(const SimConfig& cfg, const std::string& out_dir);

struct NoiseBench {
  double rms_vk = 0.0;        // raw legacy-path RMS
  double rms_vc = 0.0;        // raw measuring-resistor RMS
  double rms_vh_total = 0.0;  // raw electrode-voltage RMS
  double rms_vh_noise = 0.0;  // RMS of v_h minus its noise-free twin
  double rms_vh_noise_ideal = 0.0;  // same, with an ideal (infinite CMRR) amp
  double factor = 0.0;              // rms_vk / rms_vh_noise
};

// Constant drive at the noise reference level; RMS readings over the settled
// region, against noise-free and ideal-amplifier reruns.
NoiseBench run_noise_bench(const SimConfig& cfg, const std::string& out_dir);

struct MuxDemoResult {
  EvalReport report;  // one row per channel
  MuxOutput output;
  double expected_rate_hz = 0.0;
  std::vector<double> measured_rate_hz;
};

// N actuators on distinct sine drives, one shared sensing front-end.
MuxDemoResult run_mux_demo(const SimConfig& cfg, const std::string& out_dir);

// Scheduler-only rate probe: constant synthetic features, identity map.
// Returns measured fresh-update rates per channel over duration_s.
std::vector<double> mux_rate_probe(const SimConfig& cfg, int n_channels,
                                   double duration_s);

struct JointResult {
  EvalReport report;  // one row per joint; nrmse is on the joint angle
  std::vector<std::string> names;
  std::vector<double> angle_nrmse;
  std::vector<double> fresh_rate_hz;
  MuxOutput output;
};

// Four joints pulling on four actuators, sensed through the mux. Calibration
// runs staggered full-flexion pulses; evaluation tracks gait-like cycles.
JointResult run_joint_session(const SimConfig& cfg, const std::string& out_dir);

}  // namespace fhasel
