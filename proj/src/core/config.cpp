#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "trace.hpp"

namespace fhasel {

const char* to_string(Actuation a) {
  switch (a) {
    case Actuation::sine: return "sine";
    case Actuation::step: return "step";
    case Actuation::const_load_step: return "const_load_step";
    case Actuation::mixed_step_sine: return "mixed_step_sine";
    case Actuation::joints: return "joints";
  }
  return "?";
}

const char* to_string(Method m) { return m == Method::voltage ? "voltage" : "impedance"; }
const char* to_string(Mapping m) { return m == Mapping::single ? "single" : "dual"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return INFINITY;
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw validation_error("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(n);
  } catch (const std::exception&) {
    throw validation_error("config: bad integer value for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw validation_error("config: bad seed value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw validation_error("config: bad boolean value for " + key + ": '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw validation_error("config: empty list for " + key);
  return out;
}

std::string list_to_string(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_sig9(v[i]);
  }
  return out;
}

Actuation parse_actuation(const std::string& v) {
  if (v == "sine") return Actuation::sine;
  if (v == "step") return Actuation::step;
  if (v == "const_load_step") return Actuation::const_load_step;
  if (v == "mixed_step_sine") return Actuation::mixed_step_sine;
  if (v == "joints") return Actuation::joints;
  throw validation_error("config: unknown actuation '" + v + "'");
}

Method parse_method(const std::string& v) {
  if (v == "voltage") return Method::voltage;
  if (v == "impedance") return Method::impedance;
  throw validation_error("config: unknown method '" + v + "' (voltage|impedance)");
}

Mapping parse_mapping(const std::string& v) {
  if (v == "single") return Mapping::single;
  if (v == "dual") return Mapping::dual;
  throw validation_error("config: unknown mapping '" + v + "' (single|dual)");
}

std::vector<int> parse_order(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_int(key, item));
  }
  return out;
}

std::string order_to_string(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

void SimConfig::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    throw validation_error("config: key must be section.name, got '" + key + "'");
  }
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  const std::string v = trim(value);

  auto unknown = [&]() -> validation_error {
    return validation_error("config: unknown key '" + name + "' in section [" + section + "]");
  };

  if (section == "actuator") {
    if (name == "c_full") actuator.c_full = parse_double(key, v);
    else if (name == "c_empty") actuator.c_empty = parse_double(key, v);
    else if (name == "q_max") actuator.q_max = parse_double(key, v);
    else if (name == "r_e") actuator.r_e = parse_double(key, v);
    else if (name == "mass") actuator.mass = parse_double(key, v);
    else if (name == "stiffness") actuator.stiffness = parse_double(key, v);
    else if (name == "damping") actuator.damping = parse_double(key, v);
    else if (name == "k_f") actuator.k_f = parse_double(key, v);
    else if (name == "tau_c") actuator.tau_c = parse_double(key, v);
    else if (name == "c_couple") actuator.c_couple = parse_double(key, v);
    else if (name == "drift_f_per_s") actuator.drift_f_per_s = parse_double(key, v);
    else throw unknown();
  } else if (section == "circuit") {
    if (name == "r_n") circuit.r_n = parse_double(key, v);
    else if (name == "r_c") circuit.r_c = parse_double(key, v);
    else if (name == "r_k") circuit.r_k = parse_double(key, v);
    else if (name == "f_sense") circuit.f_sense = parse_double(key, v);
    else if (name == "a_sense") circuit.a_sense = parse_double(key, v);
    else if (name == "fs") circuit.fs = parse_double(key, v);
    else if (name == "cmrr_db") circuit.cmrr_db = parse_double(key, v);
    else if (name == "substeps") circuit.substeps = parse_int(key, v);
    else throw unknown();
  } else if (section == "noise") {
    if (name == "enabled") circuit.noise.enabled = parse_bool(key, v);
    else if (name == "tone_hz") circuit.noise.tone_hz = parse_double(key, v);
    else if (name == "tone_v") circuit.noise.tone_v = parse_double(key, v);
    else if (name == "floor_v") circuit.noise.floor_v = parse_double(key, v);
    else if (name == "c_kpath") circuit.noise.c_kpath = parse_double(key, v);
    else if (name == "v_ref_kv") circuit.noise.v_ref_kv = parse_double(key, v);
    else if (name == "vk_sine") circuit.noise.vk_sine = parse_bool(key, v);
    else throw unknown();
  } else if (section == "estimation") {
    if (name == "window") estimation.window = parse_int(key, v);
    else if (name == "vc_floor_v") estimation.vc_floor_v = parse_double(key, v);
    else if (name == "moving_average") estimation.moving_average = parse_int(key, v);
    else throw unknown();
  } else if (section == "calibration") {
    if (name == "slope_window") calibration.slope_window = parse_int(key, v);
    else if (name == "tie_tol_rel") calibration.tie_tol_rel = parse_double(key, v);
    else if (name == "hold_last_on_tie") calibration.hold_last_on_tie = parse_bool(key, v);
    else throw unknown();
  } else if (section == "mux") {
    if (name == "n_channels") mux.n_channels = parse_int(key, v);
    else if (name == "slot_windows") mux.slot_windows = parse_int(key, v);
    else if (name == "settle_windows") mux.settle_windows = parse_int(key, v);
    else if (name == "order") mux.order = parse_order(key, v);
    else throw unknown();
  } else if (section == "scenario") {
    if (name == "name") scenario.name = v;
    else if (name == "actuation") scenario.actuation = parse_actuation(v);
    else if (name == "amplitude_kv") scenario.amplitude_kv = parse_double(key, v);
    else if (name == "offset_kv") scenario.offset_kv = parse_double(key, v);
    else if (name == "freq_hz") scenario.freq_hz = parse_double(key, v);
    else if (name == "duration_s") scenario.duration_s = parse_double(key, v);
    else if (name == "settle_s") scenario.settle_s = parse_double(key, v);
    else if (name == "seed") scenario.seed = parse_u64(key, v);
    else if (name == "method") scenario.method = parse_method(v);
    else if (name == "mapping") scenario.mapping = parse_mapping(v);
    else if (name == "f_ext_n") scenario.f_ext_n = parse_double(key, v);
    else if (name == "drive_on_s") scenario.drive_on_s = parse_double(key, v);
    else if (name == "load_step_n") scenario.load_step_n = parse_double(key, v);
    else if (name == "load_step_s") scenario.load_step_s = parse_double(key, v);
    else if (name == "sweep_freqs_hz") scenario.sweep_freqs_hz = parse_list(key, v);
    else if (name == "mux_freqs_hz") scenario.mux_freqs_hz = parse_list(key, v);
    else if (name == "joint_r_m") scenario.joints.r_joint_m = parse_double(key, v);
    else if (name == "joint_k_pull") scenario.joints.k_pull = parse_double(key, v);
    else if (name == "joint_pretension_n") scenario.joints.pretension_n = parse_double(key, v);
    else if (name == "joint_theta_max_deg") scenario.joints.theta_max_deg = parse_double(key, v);
    else if (name == "joint_v_hold_kv") scenario.joints.v_hold_kv = parse_double(key, v);
    else if (name == "joint_flexion_frac") scenario.joints.flexion_frac = parse_double(key, v);
    else if (name == "joint_duration_s") scenario.joints.duration_s = parse_double(key, v);
    else if (name == "write_traces") scenario.write_traces = parse_bool(key, v);
    else if (name == "negate_drive") scenario.negate_drive = parse_bool(key, v);
    else throw unknown();
  } else {
    throw validation_error("config: unknown section [" + section + "]");
  }
}

void SimConfig::validate() const {
  actuator.validate();
  circuit.validate();
  estimation.validate();
  mux.validate();
  if (calibration.slope_window < 2) {
    throw validation_error("calibration: slope_window must be >= 2");
  }
  if (!(calibration.tie_tol_rel >= 0.0) || !std::isfinite(calibration.tie_tol_rel)) {
    throw validation_error("calibration: tie_tol_rel must be >= 0");
  }

  // RMS windows must hold whole sensing periods so the feature is unbiased.
  const double periods = estimation.window * circuit.f_sense / circuit.fs;
  if (std::abs(periods - std::round(periods)) > 1e-9 || periods < 1.0) {
    throw validation_error(
        "estimation: window must cover a whole number of sensing periods");
  }

  const ScenarioSpec& sc = scenario;
  if (!(sc.duration_s > 0.0) || !std::isfinite(sc.duration_s)) {
    throw validation_error("scenario: duration_s must be > 0");
  }
  if (!(sc.settle_s >= 0.0) || sc.settle_s >= sc.duration_s) {
    throw validation_error("scenario: settle_s must be in [0, duration)");
  }
  if (sc.amplitude_kv < 0.0) throw validation_error("scenario: amplitude_kv must be >= 0");
  const double peak = std::abs(sc.offset_kv) + sc.amplitude_kv;
  switch (sc.actuation) {
    case Actuation::sine:
    case Actuation::step: {
      if (peak > 6.0 + 1e-12) {
        throw validation_error("scenario: amplitude + offset exceeds the 6 kV supply ceiling");
      }
      if (!(sc.freq_hz > 0.0)) throw validation_error("scenario: freq_hz must be > 0");
      if (sc.duration_s * sc.freq_hz < 10.0 - 1e-9) {
        throw validation_error("scenario: periodic runs must cover at least 10 periods");
      }
      break;
    }
    case Actuation::const_load_step: {
      if (std::abs(sc.offset_kv) > 6.0 + 1e-12) {
        throw validation_error("scenario: drive level exceeds the 6 kV supply ceiling");
      }
      if (!(sc.drive_on_s >= 0.0) || sc.drive_on_s >= sc.duration_s) {
        throw validation_error("scenario: drive_on_s must lie inside the run");
      }
      if (!(sc.load_step_s > sc.drive_on_s) || sc.load_step_s >= sc.duration_s) {
        throw validation_error("scenario: load_step_s must lie after drive-on, inside the run");
      }
      break;
    }
    case Actuation::mixed_step_sine: {
      if (peak > 6.0 + 1e-12) {
        throw validation_error("scenario: amplitude + offset exceeds the 6 kV supply ceiling");
      }
      break;
    }
    case Actuation::joints: {
      const JointConfig& j = sc.joints;
      if (!(j.r_joint_m > 0.0)) throw validation_error("scenario: joint_r_m must be > 0");
      if (!(j.k_pull > 0.0)) throw validation_error("scenario: joint_k_pull must be > 0");
      if (!(j.pretension_n >= 0.0)) {
        throw validation_error("scenario: joint_pretension_n must be >= 0");
      }
      if (!(j.theta_max_deg > 0.0) || j.theta_max_deg > 135.0) {
        throw validation_error("scenario: joint_theta_max_deg must be in (0, 135]");
      }
      if (std::abs(j.v_hold_kv) > 6.0) {
        throw validation_error("scenario: joint_v_hold_kv exceeds the 6 kV supply ceiling");
      }
      if (!(j.flexion_frac > 0.0) || j.flexion_frac > 1.0) {
        throw validation_error("scenario: joint_flexion_frac must be in (0, 1]");
      }
      if (!(j.duration_s >= 8.0)) {
        throw validation_error("scenario: joint_duration_s must be >= 8 s");
      }
      break;
    }
  }
  for (double f : sc.sweep_freqs_hz) {
    if (!(f > 0.0)) throw validation_error("scenario: sweep frequencies must be > 0");
  }
  for (double f : sc.mux_freqs_hz) {
    if (!(f > 0.0)) throw validation_error("scenario: mux frequencies must be > 0");
  }
}

std::vector<std::pair<std::string, std::string>> SimConfig::metadata() const {
  std::vector<std::pair<std::string, std::string>> md;
  auto put = [&](const char* k, const std::string& v) { md.emplace_back(k, v); };
  auto putd = [&](const char* k, double v) { put(k, format_sig9(v)); };
  putd("actuator.c_full", actuator.c_full);
  putd("actuator.c_empty", actuator.c_empty);
  putd("actuator.q_max", actuator.q_max);
  putd("actuator.r_e", actuator.r_e);
  putd("actuator.mass", actuator.mass);
  putd("actuator.stiffness", actuator.stiffness);
  putd("actuator.damping", actuator.damping);
  putd("actuator.k_f", actuator.k_f);
  putd("actuator.tau_c", actuator.tau_c);
  putd("actuator.c_couple", actuator.c_couple);
  putd("actuator.drift_f_per_s", actuator.drift_f_per_s);
  putd("circuit.r_n", circuit.r_n);
  putd("circuit.r_c", circuit.r_c);
  putd("circuit.r_k", circuit.r_k);
  putd("circuit.f_sense", circuit.f_sense);
  putd("circuit.a_sense", circuit.a_sense);
  putd("circuit.fs", circuit.fs);
  putd("circuit.cmrr_db", circuit.cmrr_db);
  put("circuit.substeps", std::to_string(circuit.substeps));
  put("noise.enabled", circuit.noise.enabled ? "true" : "false");
  putd("noise.tone_hz", circuit.noise.tone_hz);
  putd("noise.tone_v", circuit.noise.tone_v);
  putd("noise.floor_v", circuit.noise.floor_v);
  putd("noise.c_kpath", circuit.noise.c_kpath);
  putd("noise.v_ref_kv", circuit.noise.v_ref_kv);
  put("noise.vk_sine", circuit.noise.vk_sine ? "true" : "false");
  put("estimation.window", std::to_string(estimation.window));
  putd("estimation.vc_floor_v", estimation.vc_floor_v);
  put("estimation.moving_average", std::to_string(estimation.moving_average));
  put("estimation.window_policy", "nonoverlapping");
  put("calibration.slope_window", std::to_string(calibration.slope_window));
  putd("calibration.tie_tol_rel", calibration.tie_tol_rel);
  put("calibration.hold_last_on_tie", calibration.hold_last_on_tie ? "true" : "false");
  put("mux.n_channels", std::to_string(mux.n_channels));
  put("mux.slot_windows", std::to_string(mux.slot_windows));
  put("mux.settle_windows", std::to_string(mux.settle_windows));
  if (!mux.order.empty()) put("mux.order", order_to_string(mux.order));
  put("scenario.name", scenario.name);
  put("scenario.actuation", to_string(scenario.actuation));
  putd("scenario.amplitude_kv", scenario.amplitude_kv);
  putd("scenario.offset_kv", scenario.offset_kv);
  putd("scenario.freq_hz", scenario.freq_hz);
  putd("scenario.duration_s", scenario.duration_s);
  putd("scenario.settle_s", scenario.settle_s);
  put("scenario.seed", std::to_string(scenario.seed));
  put("scenario.method", to_string(scenario.method));
  put("scenario.mapping", to_string(scenario.mapping));
  putd("scenario.f_ext_n", scenario.f_ext_n);
  putd("scenario.drive_on_s", scenario.drive_on_s);
  putd("scenario.load_step_n", scenario.load_step_n);
  putd("scenario.load_step_s", scenario.load_step_s);
  put("scenario.sweep_freqs_hz", list_to_string(scenario.sweep_freqs_hz));
  put("scenario.mux_freqs_hz", list_to_string(scenario.mux_freqs_hz));
  putd("scenario.joint_r_m", scenario.joints.r_joint_m);
  putd("scenario.joint_k_pull", scenario.joints.k_pull);
  putd("scenario.joint_pretension_n", scenario.joints.pretension_n);
  putd("scenario.joint_theta_max_deg", scenario.joints.theta_max_deg);
  putd("scenario.joint_v_hold_kv", scenario.joints.v_hold_kv);
  putd("scenario.joint_flexion_frac", scenario.joints.flexion_frac);
  putd("scenario.joint_duration_s", scenario.joints.duration_s);
  put("scenario.write_traces", scenario.write_traces ? "true" : "false");
  put("scenario.negate_drive", scenario.negate_drive ? "true" : "false");
  put("model.truth_alignment", "window_mean");
  put("model.nrmse_normalization", "truth_range");
  put("model.phase_estimator", "single_bin_projection");
  put("model.noise_calibration", "amplitude_fit_to_bench_rms");
  put("model.hysteresis", "first_order_capacitance_lag");
  return md;
}

SimConfig parse_config_text(const std::string& text) {
  SimConfig cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw validation_error("config line " + std::to_string(line_no) +
                               ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw validation_error("config line " + std::to_string(line_no) + ": empty section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw validation_error("config line " + std::to_string(line_no) +
                             ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw validation_error("config line " + std::to_string(line_no) +
                             ": key outside any section");
    }
    if (key.empty()) {
      throw validation_error("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.set(section + "." + key, value);
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace fhasel
