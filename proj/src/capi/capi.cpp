#include "fhasel/fhasel.h"

#include <exception>
#include <string>

#include "../core/circuit.hpp"
#include "../core/config.hpp"
#include "../core/errors.hpp"
#include "../core/estimation.hpp"
#include "../core/pipeline.hpp"

struct fhasel_session {
  fhasel::SimConfig cfg;
  std::string last_error;
  std::string last_report;
};

namespace {

template <typename Fn>
fhasel_status wrap(fhasel_session* s, Fn&& fn) {
  try {
    fn();
    if (s) s->last_error.clear();
    return FHASEL_OK;
  } catch (const fhasel::validation_error& e) {
    if (s) s->last_error = e.what();
    return FHASEL_ERR_VALIDATION;
  } catch (const std::exception& e) {
    if (s) s->last_error = e.what();
    return FHASEL_ERR_RUNTIME;
  }
}

std::string dir_or_empty(const char* out_dir) {
  return out_dir ? std::string(out_dir) : std::string();
}

}  // namespace

extern "C" {

const char* fhasel_version(void) { return "0.1.0"; }

fhasel_status fhasel_open(fhasel_session** out) {
  if (!out) return FHASEL_ERR_VALIDATION;
  *out = nullptr;
  try {
    *out = new fhasel_session();
    return FHASEL_OK;
  } catch (const std::exception&) {
    return FHASEL_ERR_RUNTIME;
  }
}

fhasel_status fhasel_open_config(const char* config_path, fhasel_session** out) {
  if (!out) return FHASEL_ERR_VALIDATION;
  *out = nullptr;
  fhasel_session* s = nullptr;
  if (fhasel_open(&s) != FHASEL_OK) return FHASEL_ERR_RUNTIME;
  const fhasel_status st = wrap(s, [&] {
    if (!config_path) throw fhasel::validation_error("config path is null");
    s->cfg = fhasel::load_config(config_path);
    s->cfg.validate();
  });
  if (st != FHASEL_OK) {
    fhasel_close(s);
    return st;
  }
  *out = s;
  return FHASEL_OK;
}

void fhasel_close(fhasel_session* s) { delete s; }

const char* fhasel_last_error(const fhasel_session* s) {
  return s ? s->last_error.c_str() : "";
}

const char* fhasel_last_report(const fhasel_session* s) {
  return s ? s->last_report.c_str() : "";
}

fhasel_status fhasel_set(fhasel_session* s, const char* key, const char* value) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    if (!key || !value) throw fhasel::validation_error("set: key/value is null");
    s->cfg.set(key, value);
  });
}

fhasel_status fhasel_simulate(fhasel_session* s, const char* out_dir) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] { fhasel::simulate_only(s->cfg, dir_or_empty(out_dir)); });
}

fhasel_status fhasel_calibrate(fhasel_session* s, const char* map_path) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    fhasel::calibrate_only(s->cfg, map_path ? std::string(map_path) : std::string());
  });
}

fhasel_status fhasel_run(fhasel_session* s, const char* out_dir, double* nrmse,
                         double* phase_deg) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    const fhasel::ScenarioResult r = fhasel::run_scenario(s->cfg, dir_or_empty(out_dir));
    s->last_report = r.report.csv();
    if (nrmse) *nrmse = r.eval.nrmse;
    if (phase_deg) *phase_deg = r.eval.phase_deg;
  });
}

fhasel_status fhasel_sweep(fhasel_session* s, const char* out_dir) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    s->last_report = fhasel::run_sweep(s->cfg, dir_or_empty(out_dir)).csv();
  });
}

fhasel_status fhasel_noise_bench(fhasel_session* s, const char* out_dir,
                                 double* rms_vk, double* rms_vc,
                                 double* rms_vh_noise, double* factor) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    const fhasel::NoiseBench b = fhasel::run_noise_bench(s->cfg, dir_or_empty(out_dir));
    if (rms_vk) *rms_vk = b.rms_vk;
    if (rms_vc) *rms_vc = b.rms_vc;
    if (rms_vh_noise) *rms_vh_noise = b.rms_vh_noise;
    if (factor) *factor = b.factor;
    std::string report = "metric,value\n";
    report += "rms_vk," + fhasel::format_sig9(b.rms_vk) + "\n";
    report += "rms_vc," + fhasel::format_sig9(b.rms_vc) + "\n";
    report += "rms_vh_total," + fhasel::format_sig9(b.rms_vh_total) + "\n";
    report += "rms_vh_noise," + fhasel::format_sig9(b.rms_vh_noise) + "\n";
    report += "rms_vh_noise_ideal," + fhasel::format_sig9(b.rms_vh_noise_ideal) + "\n";
    report += "reduction_factor," + fhasel::format_sig9(b.factor) + "\n";
    s->last_report = report;
  });
}

fhasel_status fhasel_mux_demo(fhasel_session* s, const char* out_dir) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    s->last_report = fhasel::run_mux_demo(s->cfg, dir_or_empty(out_dir)).report.csv();
  });
}

fhasel_status fhasel_joints(fhasel_session* s, const char* out_dir) {
  if (!s) return FHASEL_ERR_VALIDATION;
  return wrap(s, [&] {
    s->last_report = fhasel::run_joint_session(s->cfg, dir_or_empty(out_dir)).report.csv();
  });
}

fhasel_status fhasel_cutoff_frequency(double r_series_ohm, double r_e_ohm,
                                      double c_e_farad, double* out_hz) {
  if (!out_hz) return FHASEL_ERR_VALIDATION;
  return wrap(nullptr, [&] {
    *out_hz = fhasel::cutoff_frequency(r_series_ohm, r_e_ohm, c_e_farad);
  });
}

fhasel_status fhasel_impedance_magnitude(double v_h_rms, double v_c_rms,
                                         double r_c_ohm, double vc_floor_v,
                                         double* out_ohm) {
  if (!out_ohm) return FHASEL_ERR_VALIDATION;
  return wrap(nullptr, [&] {
    *out_ohm = fhasel::impedance_magnitude(v_h_rms, v_c_rms, r_c_ohm, vc_floor_v);
  });
}

fhasel_status fhasel_capacitance_from_impedance(double z_mag_ohm, double r_e_ohm,
                                                double f_hz, double* out_farad) {
  if (!out_farad) return FHASEL_ERR_VALIDATION;
  return wrap(nullptr, [&] {
    *out_farad = fhasel::capacitance_from_impedance(z_mag_ohm, r_e_ohm, f_hz);
  });
}

}  // extern "C"
