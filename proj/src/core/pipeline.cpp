#include "pipeline.hpp"

#include <cmath>
#include <numbers>

#include "actuator.hpp"
#include "calibration.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "metrics.hpp"

namespace fhasel {

namespace {

// Seed stride between mux channels; cal/eval passes of one channel stay
// adjacent (seed, seed + 1).
constexpr std::uint64_t k_channel_stride = 2654435761ull;

SignalTrace make_sense_input(std::size_t n, const CircuitParams& c) {
  SignalTrace v_in;
  v_in.fs = c.fs;
  v_in.t0 = 0.0;
  v_in.samples.resize(n);
  const double w = 2.0 * std::numbers::pi * c.f_sense;
  for (std::size_t i = 0; i < n; ++i) {
    v_in.samples[i] = c.a_sense * std::sin(w * (static_cast<double>(i) / c.fs));
  }
  return v_in;
}

void write_column_csv(const std::string& path, const char* header,
                      const SignalTrace& trace) {
  std::string out;
  out.reserve(trace.samples.size() * 24 + 32);
  out += header;
  out += '\n';
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out += format_sig9(trace.time_at(i));
    out += ',';
    out += format_sig9(trace.samples[i]);
    out += '\n';
  }
  atomic_write_text(path, out);
}

FeatureStream stream_from_series(const AlignedSeries& s, FeatureKind kind) {
  FeatureStream out;
  out.values = s.feature;
  out.rate = s.rate;
  out.t0 = s.t.empty() ? 0.0 : s.t.front();
  out.kind = kind;
  return out;
}

double rms_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

// RMS over the settled region of a trace.
double rms_after(const SignalTrace& tr, double t_from) {
  std::size_t i0 = 0;
  while (i0 < tr.samples.size() && tr.time_at(i0) < t_from) ++i0;
  if (i0 >= tr.samples.size()) throw model_error("rms_after: nothing after the cut");
  return rms_of(std::span<const double>(tr.samples).subspan(i0));
}

SignalTrace residual(const SignalTrace& a, const SignalTrace& b) {
  if (a.samples.size() != b.samples.size()) {
    throw model_error("residual: trace length mismatch");
  }
  SignalTrace out = a;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] -= b.samples[i];
  return out;
}

struct FreshSample {
  double t = 0.0;
  double estimate = 0.0;
};

// Fresh (non-held) rows for one channel: the first row, then every row whose
// window timestamp moved.
std::vector<FreshSample> fresh_samples(const MuxOutput& out, int channel) {
  std::vector<FreshSample> fresh;
  double last_t = -1.0;
  bool first = true;
  for (const auto& row : out.rows) {
    if (row.channel != channel) continue;
    if (first || row.t != last_t) {
      fresh.push_back({row.t, row.displacement});
      last_t = row.t;
      first = false;
    }
  }
  return fresh;
}

double measured_rate(const std::vector<double>& times) {
  if (times.size() < 2) return 0.0;
  return static_cast<double>(times.size() - 1) / (times.back() - times.front());
}

std::string report_cell(double v) { return format_sig9(v); }

ScenarioSpec sine_channel_spec(const ScenarioSpec& base, double freq) {
  ScenarioSpec s = base;
  s.actuation = Actuation::sine;
  s.freq_hz = freq;
  return s;
}

}  // namespace

PassResult run_pass(const SimConfig& cfg, const SignalTrace& drive_kv,
                    std::span<const double> f_ext_n, std::uint64_t noise_seed,
                    std::span<const double> truth_samples, bool capture) {
  drive_kv.validate("run_pass: drive");
  const std::size_t n = drive_kv.samples.size();
  if (f_ext_n.size() != n) throw model_error("run_pass: f_ext length mismatch");
  if (!truth_samples.empty() && truth_samples.size() != n) {
    throw model_error("run_pass: truth length mismatch");
  }
  const ActuatorParams& act = cfg.actuator;
  const double dt = 1.0 / cfg.circuit.fs;

  SignalTrace q_m;
  q_m.fs = cfg.circuit.fs;
  q_m.t0 = 0.0;
  q_m.samples.resize(n);
  std::vector<double> c_e(n);
  ActuatorState state = initial_state(act);
  for (std::size_t i = 0; i < n; ++i) {
    q_m.samples[i] = state.q;
    c_e[i] = state.c_e;
    if (i + 1 < n) {
      state = step_dynamics(state, drive_kv.samples[i], f_ext_n[i], dt, act);
    }
  }

  CircuitParams circ = cfg.circuit;
  circ.noise.seed = noise_seed;
  circ.noise.c_couple = act.c_couple;
  const SignalTrace v_in = make_sense_input(n, circ);
  SensingFrame frames = simulate_sensing_path(c_e, v_in, circ, act.r_e,
                                              circ.noise.enabled, drive_kv.samples);

  PassResult out;
  FeatureStream vh_rms = windowed_rms(frames.v_h, cfg.estimation);
  FeatureStream vc_rms = windowed_rms(frames.v_c, cfg.estimation);
  out.voltage = voltage_feature(vh_rms);

  FeatureStream z = impedance_stream(vh_rms, vc_rms, circ.r_c, cfg.estimation.vc_floor_v);
  out.impedance = z;
  for (double& v : out.impedance.values) {
    v = capacitance_from_impedance(v, act.r_e, circ.f_sense);
  }
  if (cfg.estimation.moving_average > 1) {
    out.voltage = moving_average(out.voltage, cfg.estimation.moving_average);
    out.impedance = moving_average(out.impedance, cfg.estimation.moving_average);
  }

  SignalTrace truth_trace;
  truth_trace.fs = cfg.circuit.fs;
  truth_trace.t0 = 0.0;
  if (truth_samples.empty()) {
    truth_trace.samples = q_m.samples;
  } else {
    truth_trace.samples.assign(truth_samples.begin(), truth_samples.end());
  }
  out.truth = windowed_mean(truth_trace, cfg.estimation);

  if (capture) {
    out.drive_kv = drive_kv;
    out.q_m = std::move(q_m);
    out.frames = std::move(frames);
    out.captured = true;
  }
  return out;
}

const FeatureStream& method_feature(const PassResult& pass, Method m) {
  return m == Method::voltage ? pass.voltage : pass.impedance;
}

AlignedSeries trim_series(const FeatureStream& feature, const FeatureStream& truth,
                          double settle_s) {
  if (feature.values.size() != truth.values.size() || feature.rate != truth.rate ||
      feature.t0 != truth.t0) {
    throw model_error("trim_series: feature and truth streams are misaligned");
  }
  AlignedSeries out;
  out.rate = feature.rate;
  for (std::size_t i = 0; i < feature.values.size(); ++i) {
    const double t = feature.time_at(i);
    if (t < settle_s) continue;
    out.t.push_back(t);
    out.feature.push_back(feature.values[i]);
    out.truth.push_back(truth.values[i]);
  }
  if (out.t.size() < 8) throw model_error("trim_series: too few windows after settle");
  return out;
}

MuxChannelMap fit_map(const AlignedSeries& cal, Mapping mapping, FeatureKind kind,
                      const FitOptions& opt) {
  MuxChannelMap map;
  if (mapping == Mapping::single) {
    map.dual = false;
    map.single = fit_poly3(cal.feature, cal.truth, kind);
  } else {
    map.dual = true;
    map.dual_map = fit_dual_poly3(cal.feature, cal.truth, kind, opt);
  }
  return map;
}

Evaluation evaluate_map(const MuxChannelMap& map, const AlignedSeries& eval,
                        const FitOptions& opt, double clamp_span,
                        std::optional<double> f_act) {
  const ClampRange clamp = estimate_clamp(clamp_span);
  const std::size_t warm = static_cast<std::size_t>(opt.slope_window) - 1;
  if (eval.t.size() <= warm + 2) throw model_error("evaluate_map: evaluation too short");

  Evaluation out;
  PhaseTracker tracker(map.dual ? map.dual_map.slope_window : opt.slope_window,
                       map.dual ? map.dual_map.slope_tie_tol : 0.0,
                       map.dual ? map.dual_map.hold_last_on_tie : true);
  for (std::size_t i = 0; i < eval.t.size(); ++i) {
    const double f = eval.feature[i];
    double est;
    if (map.dual) {
      est = estimate_displacement(map.dual_map, f, tracker, clamp);
    } else {
      tracker.feed(f);  // keeps single and dual on the same warm-up clock
      est = estimate_displacement(map.single, f, clamp);
    }
    if (i < warm) continue;
    out.t.push_back(eval.t[i]);
    out.estimate.push_back(est);
    out.truth.push_back(eval.truth[i]);
  }
  out.nrmse = nrmse(out.estimate, out.truth);
  if (f_act) {
    out.phase_deg = phase_lag_deg(out.estimate, out.truth, eval.rate, out.t.front(),
                                  *f_act);
  }
  return out;
}

std::string EvalReport::csv() const {
  std::string out = "scenario,method,mapping,freq_hz,nrmse,phase_deg,seed\n";
  for (const auto& r : rows) {
    out += r.scenario;
    out += ',';
    out += to_string(r.method);
    out += ',';
    out += to_string(r.mapping);
    out += ',';
    out += report_cell(r.freq_hz);
    out += ',';
    out += report_cell(r.nrmse);
    out += ',';
    out += report_cell(r.phase_deg);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

void write_report(const std::string& dir, const EvalReport& report) {
  atomic_write_text(dir + "/report.csv", report.csv());
  std::string md = "key,value\n";
  for (const auto& [k, v] : report.metadata) {
    md += k;
    md += ',';
    md += v;
    md += '\n';
  }
  atomic_write_text(dir + "/metadata.csv", md);
}

namespace {

void write_estimates_csv(const std::string& path, const Evaluation& ev) {
  std::string out = "t_s,estimate,truth\n";
  out.reserve(ev.t.size() * 36 + 24);
  for (std::size_t i = 0; i < ev.t.size(); ++i) {
    out += format_sig9(ev.t[i]);
    out += ',';
    out += format_sig9(ev.estimate[i]);
    out += ',';
    out += format_sig9(ev.truth[i]);
    out += '\n';
  }
  atomic_write_text(path, out);
}

void write_pass_traces(const std::string& dir, const PassResult& pass) {
  write_column_csv(dir + "/drive.csv", "t_s,drive_kv", pass.drive_kv);
  write_column_csv(dir + "/displacement.csv", "t_s,q_m", pass.q_m);
  write_trace_csv(dir + "/v_h.csv", pass.frames.v_h);
  write_trace_csv(dir + "/v_c.csv", pass.frames.v_c);
  write_trace_csv(dir + "/v_k.csv", pass.frames.v_k);
}

void save_channel_map(const std::string& path, const MuxChannelMap& map) {
  if (map.dual) {
    save_map(path, map.dual_map);
  } else {
    save_map(path, map.single);
  }
}

}  // namespace

ScenarioResult run_scenario(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ScenarioSpec& sc = cfg.scenario;
  const DrivePlan plan = build_drive(sc, cfg.circuit.fs);
  const bool capture = sc.write_traces && !out_dir.empty();

  const PassResult cal =
      run_pass(cfg, plan.drive_kv, plan.f_ext_n, sc.seed, {}, false);
  const PassResult eval_pass =
      run_pass(cfg, plan.drive_kv, plan.f_ext_n, sc.seed + 1, {}, capture);

  const FeatureKind kind = method_feature(cal, sc.method).kind;
  const AlignedSeries cal_series =
      trim_series(method_feature(cal, sc.method), cal.truth, sc.settle_s);
  const AlignedSeries eval_series =
      trim_series(method_feature(eval_pass, sc.method), eval_pass.truth, sc.settle_s);

  const MuxChannelMap map = fit_map(cal_series, sc.mapping, kind, cfg.calibration);

  std::optional<double> f_act;
  double freq_col = 0.0;
  if (sc.actuation == Actuation::sine || sc.actuation == Actuation::step) {
    f_act = sc.freq_hz;
    freq_col = sc.freq_hz;
  }
  Evaluation ev =
      evaluate_map(map, eval_series, cfg.calibration, cfg.actuator.q_max, f_act);

  ScenarioResult result;
  result.report.rows.push_back({sc.name, sc.method, sc.mapping, freq_col, ev.nrmse,
                                ev.phase_deg, sc.seed});
  result.report.metadata = cfg.metadata();
  result.eval = std::move(ev);

  if (!out_dir.empty()) {
    write_report(out_dir, result.report);
    write_estimates_csv(out_dir + "/estimates.csv", result.eval);
    save_channel_map(out_dir + "/map.csv", map);
    if (capture) {
      write_pass_traces(out_dir, eval_pass);
      write_feature_csv(out_dir + "/features.csv", method_feature(eval_pass, sc.method));
    }
  }
  return result;
}

void simulate_only(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (out_dir.empty()) throw validation_error("simulate: output directory required");
  const ScenarioSpec& sc = cfg.scenario;
  const DrivePlan plan = build_drive(sc, cfg.circuit.fs);
  const PassResult pass = run_pass(cfg, plan.drive_kv, plan.f_ext_n, sc.seed, {}, true);
  write_pass_traces(out_dir, pass);
  write_feature_csv(out_dir + "/features_voltage.csv", pass.voltage);
  write_feature_csv(out_dir + "/features_impedance.csv", pass.impedance);
  write_feature_csv(out_dir + "/truth_windows.csv", pass.truth);
  std::string md = "key,value\n";
  for (const auto& [k, v] : cfg.metadata()) {
    md += k;
    md += ',';
    md += v;
    md += '\n';
  }
  atomic_write_text(out_dir + "/metadata.csv", md);
}

void calibrate_only(const SimConfig& cfg, const std::string& map_path) {
  cfg.validate();
  if (map_path.empty()) throw validation_error("calibrate: map path required");
  const ScenarioSpec& sc = cfg.scenario;
  const DrivePlan plan = build_drive(sc, cfg.circuit.fs);
  const PassResult cal = run_pass(cfg, plan.drive_kv, plan.f_ext_n, sc.seed, {}, false);
  const FeatureKind kind = method_feature(cal, sc.method).kind;
  const AlignedSeries cal_series =
      trim_series(method_feature(cal, sc.method), cal.truth, sc.settle_s);
  save_channel_map(map_path, fit_map(cal_series, sc.mapping, kind, cfg.calibration));
}

EvalReport run_sweep(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  EvalReport report;
  report.metadata = cfg.metadata();
  for (double f : cfg.scenario.sweep_freqs_hz) {
    SimConfig cfg_f = cfg;
    cfg_f.scenario.actuation = Actuation::sine;
    cfg_f.scenario.freq_hz = f;
    cfg_f.scenario.duration_s =
        cfg.scenario.settle_s + std::max(10.0, 10.0 / f);
    cfg_f.validate();
    const ScenarioSpec& sc = cfg_f.scenario;
    const DrivePlan plan = build_drive(sc, cfg_f.circuit.fs);
    const PassResult cal = run_pass(cfg_f, plan.drive_kv, plan.f_ext_n, sc.seed);
    const PassResult ev = run_pass(cfg_f, plan.drive_kv, plan.f_ext_n, sc.seed + 1);
    for (Method m : {Method::voltage, Method::impedance}) {
      const AlignedSeries cal_series =
          trim_series(method_feature(cal, m), cal.truth, sc.settle_s);
      const AlignedSeries eval_series =
          trim_series(method_feature(ev, m), ev.truth, sc.settle_s);
      const MuxChannelMap map =
          fit_map(cal_series, sc.mapping, method_feature(cal, m).kind, cfg_f.calibration);
      Evaluation e = evaluate_map(map, eval_series, cfg_f.calibration,
                                  cfg_f.actuator.q_max, f);
      report.rows.push_back(
          {sc.name, m, sc.mapping, f, e.nrmse, e.phase_deg, sc.seed});
    }
  }
  if (!out_dir.empty()) write_report(out_dir, report);
  return report;
}

NoiseBench run_noise_bench(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ScenarioSpec& sc = cfg.scenario;
  const double fs = cfg.circuit.fs;
  const std::size_t n = static_cast<std::size_t>(std::llround(sc.duration_s * fs));
  SignalTrace drive;
  drive.fs = fs;
  drive.t0 = 0.0;
  drive.samples.assign(n, (sc.negate_drive ? -1.0 : 1.0) * cfg.circuit.noise.v_ref_kv);
  const std::vector<double> f_ext(n, sc.f_ext_n);

  SimConfig noisy = cfg;
  noisy.circuit.noise.enabled = true;
  SimConfig clean = cfg;
  clean.circuit.noise.enabled = false;
  SimConfig ideal = noisy;
  ideal.circuit.cmrr_db = INFINITY;

  const PassResult pass_noise = run_pass(noisy, drive, f_ext, sc.seed, {}, true);
  const PassResult pass_clean = run_pass(clean, drive, f_ext, sc.seed, {}, true);
  const PassResult pass_ideal = run_pass(ideal, drive, f_ext, sc.seed, {}, true);

  NoiseBench bench;
  bench.rms_vk = rms_after(pass_noise.frames.v_k, sc.settle_s);
  bench.rms_vc = rms_after(pass_noise.frames.v_c, sc.settle_s);
  bench.rms_vh_total = rms_after(pass_noise.frames.v_h, sc.settle_s);
  bench.rms_vh_noise =
      rms_after(residual(pass_noise.frames.v_h, pass_clean.frames.v_h), sc.settle_s);
  bench.rms_vh_noise_ideal =
      rms_after(residual(pass_ideal.frames.v_h, pass_clean.frames.v_h), sc.settle_s);
  bench.factor = bench.rms_vk / bench.rms_vh_noise;

  if (!out_dir.empty()) {
    std::string out = "metric,value\n";
    auto put = [&](const char* k, double v) {
      out += k;
      out += ',';
      out += format_sig9(v);
      out += '\n';
    };
    put("rms_vk", bench.rms_vk);
    put("rms_vc", bench.rms_vc);
    put("rms_vh_total", bench.rms_vh_total);
    put("rms_vh_noise", bench.rms_vh_noise);
    put("rms_vh_noise_ideal", bench.rms_vh_noise_ideal);
    put("reduction_factor", bench.factor);
    atomic_write_text(out_dir + "/bench.csv", out);
    EvalReport report;
    report.metadata = cfg.metadata();
    write_report(out_dir, report);
  }
  return bench;
}

MuxDemoResult run_mux_demo(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ScenarioSpec& sc = cfg.scenario;
  const MuxPlan& plan = cfg.mux;
  const std::size_t n_ch = static_cast<std::size_t>(plan.n_channels);
  if (sc.mux_freqs_hz.size() < n_ch) {
    throw validation_error("mux demo: need one drive frequency per channel");
  }

  std::vector<MuxChannelMap> maps(n_ch);
  std::vector<FeatureStream> eval_streams(n_ch);
  std::vector<AlignedSeries> eval_series(n_ch);
  for (std::size_t ch = 0; ch < n_ch; ++ch) {
    const ScenarioSpec spec = sine_channel_spec(sc, sc.mux_freqs_hz[ch]);
    const DrivePlan dplan = build_drive(spec, cfg.circuit.fs);
    const std::uint64_t base = sc.seed + k_channel_stride * ch;
    const PassResult cal = run_pass(cfg, dplan.drive_kv, dplan.f_ext_n, base);
    const PassResult ev = run_pass(cfg, dplan.drive_kv, dplan.f_ext_n, base + 1);
    const FeatureKind kind = method_feature(cal, sc.method).kind;
    const AlignedSeries cal_s =
        trim_series(method_feature(cal, sc.method), cal.truth, sc.settle_s);
    maps[ch] = fit_map(cal_s, sc.mapping, kind, cfg.calibration);
    eval_series[ch] =
        trim_series(method_feature(ev, sc.method), ev.truth, sc.settle_s);
    eval_streams[ch] = stream_from_series(eval_series[ch], kind);
  }

  MuxDemoResult result;
  result.output =
      step_mux(plan, eval_streams, maps, estimate_clamp(cfg.actuator.q_max));
  result.expected_rate_hz =
      eval_streams[0].rate *
      static_cast<double>(plan.slot_windows - plan.settle_windows) /
      static_cast<double>(plan.cycle_windows());
  result.report.metadata = cfg.metadata();
  for (std::size_t ch = 0; ch < n_ch; ++ch) {
    result.measured_rate_hz.push_back(measured_rate(result.output.fresh_times[ch]));
    const auto fresh = fresh_samples(result.output, static_cast<int>(ch));
    std::vector<double> est, truth;
    for (const auto& s : fresh) {
      const auto idx = static_cast<std::size_t>(
          std::llround((s.t - eval_series[ch].t.front()) * eval_series[ch].rate));
      est.push_back(s.estimate);
      truth.push_back(eval_series[ch].truth[idx]);
    }
    result.report.rows.push_back({sc.name + ":ch" + std::to_string(ch), sc.method,
                                  sc.mapping, sc.mux_freqs_hz[ch], nrmse(est, truth),
                                  std::numeric_limits<double>::quiet_NaN(), sc.seed});
  }

  if (!out_dir.empty()) {
    write_report(out_dir, result.report);
    write_mux_csv(out_dir + "/mux.csv", result.output.rows);
  }
  return result;
}

std::vector<double> mux_rate_probe(const SimConfig& cfg, int n_channels,
                                   double duration_s) {
  if (n_channels < 1) throw validation_error("mux rate probe: n_channels must be >= 1");
  if (!(duration_s > 0.0)) throw validation_error("mux rate probe: duration must be > 0");
  MuxPlan plan = cfg.mux;
  plan.n_channels = n_channels;
  plan.order.clear();
  plan.validate();

  const double rate = cfg.circuit.fs / static_cast<double>(cfg.estimation.window);
  const auto n_windows = static_cast<std::size_t>(std::floor(duration_s * rate));
  FeatureStream constant;
  constant.values.assign(n_windows, 1.0);
  constant.rate = rate;
  constant.t0 = 0.5 / rate;
  std::vector<FeatureStream> streams(static_cast<std::size_t>(n_channels), constant);

  MuxChannelMap identity;
  identity.single.coeffs = {0.0, 1.0, 0.0, 0.0};
  identity.single.mean = 0.0;
  identity.single.scale = 1.0;
  std::vector<MuxChannelMap> maps(static_cast<std::size_t>(n_channels), identity);

  const MuxOutput out = step_mux(plan, streams, maps, {-1e300, 1e300});
  std::vector<double> rates;
  for (const auto& times : out.fresh_times) rates.push_back(measured_rate(times));
  return rates;
}

JointResult run_joint_session(const SimConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ScenarioSpec& sc = cfg.scenario;
  const JointConfig& jc = sc.joints;
  const MuxPlan& plan = cfg.mux;
  const double fs = cfg.circuit.fs;
  if (plan.n_channels != 4) {
    throw validation_error("joint session: mux plan must carry 4 channels");
  }

  const JointTrajectory cal_tr = joint_calibration_trajectory(jc, fs, sc.settle_s);
  const JointTrajectory eval_tr = joint_evaluation_trajectory(jc, fs, sc.settle_s);
  const std::size_t n = cal_tr.theta_deg[0].size();

  SignalTrace drive;
  drive.fs = fs;
  drive.t0 = 0.0;
  drive.samples.assign(n, (sc.negate_drive ? -1.0 : 1.0) * jc.v_hold_kv);

  auto tension_of = [&](const std::vector<double>& theta) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = tension_of_angle(theta[i], jc);
    return f;
  };

  JointResult result;
  result.names = cal_tr.names;
  std::vector<MuxChannelMap> maps(4);
  std::vector<FeatureStream> eval_streams(4);
  std::vector<AlignedSeries> eval_series(4);

  for (std::size_t ch = 0; ch < 4; ++ch) {
    const std::uint64_t base = sc.seed + k_channel_stride * ch;
    const std::vector<double> cal_f = tension_of(cal_tr.theta_deg[ch]);
    const PassResult cal =
        run_pass(cfg, drive, cal_f, base, cal_tr.theta_deg[ch], false);
    const AlignedSeries cal_s =
        trim_series(method_feature(cal, sc.method), cal.truth, sc.settle_s);

    // Calibration sees only the windows the mux grants this joint. The mux
    // clock starts at the settle boundary for both passes.
    std::vector<double> f_fresh, th_fresh;
    for (std::size_t w = 0; w < cal_s.t.size(); ++w) {
      const ChannelSlot slot = schedule(plan, static_cast<std::int64_t>(w));
      if (slot.settling || slot.channel != static_cast<int>(ch)) continue;
      f_fresh.push_back(cal_s.feature[w]);
      th_fresh.push_back(cal_s.truth[w]);
    }
    double theta_peak = 0.0;
    for (double th : th_fresh) theta_peak = std::max(theta_peak, th);
    if (theta_peak < jc.flexion_frac * jc.theta_max_deg) {
      throw validation_error("joint calibration never reached full flexion for " +
                             cal_tr.names[ch]);
    }
    const FeatureKind kind = method_feature(cal, sc.method).kind;
    maps[ch] = fit_map({{}, f_fresh, th_fresh, cal_s.rate}, sc.mapping, kind,
                       cfg.calibration);

    const std::vector<double> eval_f = tension_of(eval_tr.theta_deg[ch]);
    const PassResult ev =
        run_pass(cfg, drive, eval_f, base + 1, eval_tr.theta_deg[ch], false);
    eval_series[ch] =
        trim_series(method_feature(ev, sc.method), ev.truth, sc.settle_s);
    eval_streams[ch] = stream_from_series(eval_series[ch], kind);
  }

  result.output = step_mux(plan, eval_streams, maps,
                           estimate_clamp(jc.theta_max_deg));
  result.report.metadata = cfg.metadata();
  for (std::size_t ch = 0; ch < 4; ++ch) {
    result.fresh_rate_hz.push_back(measured_rate(result.output.fresh_times[ch]));
    const auto fresh = fresh_samples(result.output, static_cast<int>(ch));
    std::vector<double> est, truth;
    for (const auto& s : fresh) {
      const auto idx = static_cast<std::size_t>(
          std::llround((s.t - eval_series[ch].t.front()) * eval_series[ch].rate));
      est.push_back(s.estimate);
      truth.push_back(eval_series[ch].truth[idx]);
    }
    const double e = nrmse(est, truth);
    result.angle_nrmse.push_back(e);
    result.report.rows.push_back({sc.name + ":" + result.names[ch], sc.method,
                                  sc.mapping, 0.0, e,
                                  std::numeric_limits<double>::quiet_NaN(), sc.seed});
  }

  if (!out_dir.empty()) {
    write_report(out_dir, result.report);
    write_mux_csv(out_dir + "/mux.csv", result.output.rows);
    for (std::size_t ch = 0; ch < 4; ++ch) {
      save_channel_map(out_dir + "/map_" + result.names[ch] + ".csv", maps[ch]);
    }
  }
  return result;
}

}  // namespace fhasel
