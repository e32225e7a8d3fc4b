#ifndef FHASEL_H
#define FHASEL_H

/* C interface to the self-sensing actuator toolkit. A session holds one
 * configuration; entry points run a scenario and optionally write CSV files
 * into an output directory. All functions return fhasel_status; on failure
 * fhasel_last_error() carries the message of the failing call. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fhasel_status {
  FHASEL_OK = 0,
  FHASEL_ERR_VALIDATION = 1, /* bad configuration or scenario definition */
  FHASEL_ERR_RUNTIME = 2     /* model/domain failure while running */
} fhasel_status;

typedef struct fhasel_session fhasel_session;

const char* fhasel_version(void);

/* Session with built-in defaults. */
fhasel_status fhasel_open(fhasel_session** out);
/* Session from a sectioned key = value config file. */
fhasel_status fhasel_open_config(const char* config_path, fhasel_session** out);
void fhasel_close(fhasel_session* s);

/* Message of the last failing call on this session; empty string if none. */
const char* fhasel_last_error(const fhasel_session* s);

/* Override one option as "section.key", e.g. fhasel_set(s, "scenario.seed",
 * "42"). Unknown keys are validation errors. */
fhasel_status fhasel_set(fhasel_session* s, const char* key, const char* value);

/* Report CSV text of the most recent run/sweep/mux/joints call. */
const char* fhasel_last_report(const fhasel_session* s);

/* Simulate one pass and write traces + features into out_dir. */
fhasel_status fhasel_simulate(fhasel_session* s, const char* out_dir);

/* Fit a calibration map on the calibration pass and save it to map_path. */
fhasel_status fhasel_calibrate(fhasel_session* s, const char* map_path);

/* Full scenario: calibrate, estimate on a fresh pass, score. out_dir may be
 * NULL to skip files. nrmse/phase_deg may be NULL. */
fhasel_status fhasel_run(fhasel_session* s, const char* out_dir, double* nrmse,
                         double* phase_deg);

/* Frequency sweep over scenario.sweep_freqs_hz, both methods. */
fhasel_status fhasel_sweep(fhasel_session* s, const char* out_dir);

/* Noise bench at the reference drive level. Output pointers may be NULL. */
fhasel_status fhasel_noise_bench(fhasel_session* s, const char* out_dir,
                                 double* rms_vk, double* rms_vc,
                                 double* rms_vh_noise, double* factor);

/* Multiplexed multi-actuator demo over scenario.mux_freqs_hz. */
fhasel_status fhasel_mux_demo(fhasel_session* s, const char* out_dir);

/* Four-joint tracking session through the mux. */
fhasel_status fhasel_joints(fhasel_session* s, const char* out_dir);

/* Pure helpers; no session, so failures carry no message. */

/* f_c = 1 / (2 pi (r_series + r_e) c_e) */
fhasel_status fhasel_cutoff_frequency(double r_series_ohm, double r_e_ohm,
                                      double c_e_farad, double* out_hz);
/* |Z| = v_h_rms * r_c / v_c_rms, guarded by the v_c floor */
fhasel_status fhasel_impedance_magnitude(double v_h_rms, double v_c_rms,
                                         double r_c_ohm, double vc_floor_v,
                                         double* out_ohm);
/* C = 1 / (2 pi f sqrt(|Z|^2 - r_e^2)) */
fhasel_status fhasel_capacitance_from_impedance(double z_mag_ohm, double r_e_ohm,
                                                double f_hz, double* out_farad);

#ifdef __cplusplus
}
#endif

#endif /* FHASEL_H */
