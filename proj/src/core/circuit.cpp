#include "circuit.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"
#include "rng.hpp"

namespace fhasel {

namespace {

constexpr double k_two_pi = 2.0 * std::numbers::pi;

double cmrr_epsilon(double cmrr_db) {
  if (std::isinf(cmrr_db)) return 0.0;
  return std::pow(10.0, -cmrr_db / 20.0);
}

// Catmull-Rom value at fractional position i+s, endpoints clamped.
double catmull_rom(std::span<const double> v, std::size_t i, double s) {
  const std::size_t n = v.size();
  const double p0 = v[i > 0 ? i - 1 : 0];
  const double p1 = v[i];
  const double p2 = v[i + 1 < n ? i + 1 : n - 1];
  const double p3 = v[i + 2 < n ? i + 2 : n - 1];
  const double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  const double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  const double c = -0.5 * p0 + 0.5 * p2;
  return ((a * s + b) * s + c) * s + p1;
}

}  // namespace

void CircuitParams::validate() const {
  auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!pos(r_n) || !pos(r_c) || !pos(r_k)) {
    throw validation_error("circuit: resistances must be > 0");
  }
  if (std::abs(r_n - r_c) > 1e-9 * r_c) {
    throw validation_error("circuit: r_n must equal r_c (common-mode symmetry)");
  }
  if (!pos(f_sense)) throw validation_error("circuit: f_sense must be > 0");
  if (!std::isfinite(a_sense) || a_sense < 0.0) {
    throw validation_error("circuit: a_sense must be >= 0");
  }
  if (!pos(fs)) throw validation_error("circuit: fs must be > 0");
  if (fs < 20.0 * f_sense) throw validation_error("circuit: fs must be >= 20 * f_sense");
  if (std::isnan(cmrr_db)) throw validation_error("circuit: cmrr_db must not be NaN");
  if (substeps < 1 || substeps > 64) {
    throw validation_error("circuit: substeps must be in [1, 64]");
  }
  if (noise.enabled) {
    if (!pos(noise.tone_hz) || noise.tone_hz >= fs / 2.0) {
      throw validation_error("circuit: noise tone must sit below Nyquist");
    }
    if (!std::isfinite(noise.tone_v) || noise.tone_v < 0.0 ||
        !std::isfinite(noise.floor_v) || noise.floor_v < 0.0 ||
        !std::isfinite(noise.c_couple) || noise.c_couple < 0.0 ||
        !std::isfinite(noise.c_kpath) || noise.c_kpath < 0.0) {
      throw validation_error("circuit: noise amplitudes must be >= 0");
    }
    if (!pos(noise.v_ref_kv)) throw validation_error("circuit: noise v_ref_kv must be > 0");
  }
}

double cutoff_frequency(double r_series, double r_e, double c_e) {
  if (!std::isfinite(r_series) || !std::isfinite(r_e) || !std::isfinite(c_e) ||
      r_series < 0.0 || r_e < 0.0 || !(c_e > 0.0) || !(r_series + r_e > 0.0)) {
    throw model_error("cutoff_frequency: need r_series + r_e > 0 and c_e > 0");
  }
  return 1.0 / (k_two_pi * (r_series + r_e) * c_e);
}

SteadyStateGains steady_state_gains(double f, const CircuitParams& p, double r_e,
                                    double c_e) {
  if (!(f > 0.0) || !std::isfinite(f)) throw model_error("steady_state_gains: f must be > 0");
  if (!(c_e > 0.0) || !std::isfinite(c_e) || !(r_e >= 0.0)) {
    throw model_error("steady_state_gains: need c_e > 0 and r_e >= 0");
  }
  const double w = k_two_pi * f;
  const std::complex<double> z_e(r_e, -1.0 / (w * c_e));
  const std::complex<double> z_tot = z_e + p.r_n + p.r_c;
  SteadyStateGains g;
  g.gain_vh = std::abs(z_e) / std::abs(z_tot);
  g.gain_vc = p.r_c / std::abs(z_tot);
  g.phase_vh = std::arg(z_e) - std::arg(z_tot);
  g.phase_vc = -std::arg(z_tot);
  return g;
}

SignalTrace instrumentation_amp(const SignalTrace& plus, const SignalTrace& minus,
                                double cmrr_db) {
  plus.validate("instrumentation_amp(+)");
  minus.validate("instrumentation_amp(-)");
  if (plus.samples.size() != minus.samples.size() || plus.fs != minus.fs) {
    throw model_error("instrumentation_amp: input traces must share length and rate");
  }
  if (std::isnan(cmrr_db)) throw model_error("instrumentation_amp: cmrr_db must not be NaN");
  const double eps = cmrr_epsilon(cmrr_db);
  SignalTrace out;
  out.fs = plus.fs;
  out.t0 = plus.t0;
  out.samples.resize(plus.samples.size());
  for (std::size_t i = 0; i < plus.samples.size(); ++i) {
    const double d = plus.samples[i] - minus.samples[i];
    const double cm = 0.5 * (plus.samples[i] + minus.samples[i]);
    out.samples[i] = d + eps * cm;
  }
  return out;
}

SensingFrame simulate_sensing_path(std::span<const double> c_e_of_t,
                                   const SignalTrace& v_in, const CircuitParams& p,
                                   double r_e, bool noise_on,
                                   std::span<const double> drive_kv) {
  p.validate();
  v_in.validate("simulate_sensing_path: v_in");
  const std::size_t n = v_in.samples.size();
  if (n < 2) throw model_error("simulate_sensing_path: need at least 2 samples");
  if (c_e_of_t.size() != n) {
    throw model_error("simulate_sensing_path: c_e stream length must match v_in");
  }
  if (std::abs(v_in.fs - p.fs) > 1e-6 * p.fs) {
    throw model_error("simulate_sensing_path: v_in rate must match circuit fs");
  }
  if (!(r_e > 0.0) || !std::isfinite(r_e)) {
    throw model_error("simulate_sensing_path: r_e must be > 0");
  }
  for (double c : c_e_of_t) {
    if (!(c >= 1e-12) || !(c <= 1e-6)) {
      throw model_error("simulate_sensing_path: c_e outside [1 pF, 1 uF]");
    }
  }
  const bool inject = noise_on && p.noise.enabled;
  if (inject && drive_kv.size() != n) {
    throw model_error("simulate_sensing_path: drive trace required when noise is on");
  }

  const double dt = 1.0 / p.fs;
  const double r_t = p.r_n + r_e + p.r_c;
  const int m = p.substeps;
  const double dts = dt / m;

  // Clean series loop. The sample at i reads the state before advancing, so
  // outputs stay synchronous with v_in.
  std::vector<double> vh_clean(n), vb_clean(n);
  double charge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c_i = c_e_of_t[i];
    const double cur = (v_in.samples[i] - charge / c_i) / r_t;
    vh_clean[i] = cur * r_e + charge / c_i;
    vb_clean[i] = cur * p.r_c;
    if (i + 1 == n) break;
    const double c_next = c_e_of_t[i + 1];
    for (int k = 0; k < m; ++k) {
      const double s0 = static_cast<double>(k) / m;
      const double s1 = static_cast<double>(k + 1) / m;
      const double va = (k == 0) ? v_in.samples[i] : catmull_rom(v_in.samples, i, s0);
      const double vb = (k + 1 == m) ? v_in.samples[i + 1] : catmull_rom(v_in.samples, i, s1);
      // dQ/dt = (v - Q/c)/r_t, trapezoidal in Q with c interpolated linearly.
      const double ca = c_i + (c_next - c_i) * s0;
      const double cb = c_i + (c_next - c_i) * s1;
      const double num =
          charge * (1.0 - dts / (2.0 * r_t * ca)) + dts * (va + vb) / (2.0 * r_t);
      charge = num / (1.0 + dts / (2.0 * r_t * cb));
    }
  }

  // Ripple injection. The coupling current splits evenly between the two
  // symmetric branches (r_n = r_c), lifting nodes A and B by the same v_cm;
  // the legacy path sees the full ripple current through c_kpath and r_k.
  std::vector<double> v_cm(n, 0.0), v_k_raw(n, 0.0);
  std::vector<double> wh(n, 0.0), wc(n, 0.0), wk(n, 0.0);
  if (inject) {
    const NoiseParams& nz = p.noise;
    NoiseRng rng_h(nz.seed, 1), rng_c(nz.seed, 2), rng_k(nz.seed, 3);
    const double w_tone = k_two_pi * nz.tone_hz;
    const double w_sense = k_two_pi * p.f_sense;
    const double r_half = 0.5 * p.r_n;
    double d_prev = std::abs(drive_kv[0]) / nz.v_ref_kv;
    double ripple_prev = d_prev * nz.tone_v * std::sin(w_tone * (v_in.t0 - dt));
    double vk_src_prev = ripple_prev;
    if (nz.vk_sine) vk_src_prev += p.a_sense * std::sin(w_sense * (v_in.t0 - dt));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = v_in.time_at(i);
      const double d = std::abs(drive_kv[i]) / nz.v_ref_kv;
      const double ripple = d * nz.tone_v * std::sin(w_tone * t);
      v_cm[i] = nz.c_couple * ((ripple - ripple_prev) / dt) * r_half;
      double vk_src = ripple;
      if (nz.vk_sine) vk_src += p.a_sense * std::sin(w_sense * t);
      v_k_raw[i] = p.r_k * nz.c_kpath * (vk_src - vk_src_prev) / dt;
      ripple_prev = ripple;
      vk_src_prev = vk_src;
      wh[i] = nz.floor_v * d * rng_h.normal();
      wc[i] = nz.floor_v * d * rng_c.normal();
      wk[i] = nz.floor_v * d * rng_k.normal();
    }
  }

  const double eps = cmrr_epsilon(p.cmrr_db);
  SensingFrame frame;
  frame.v_h.fs = frame.v_c.fs = frame.v_k.fs = p.fs;
  frame.v_h.t0 = frame.v_c.t0 = frame.v_k.t0 = v_in.t0;
  frame.v_h.samples.resize(n);
  frame.v_c.samples.resize(n);
  frame.v_k.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v_b = vb_clean[i] + v_cm[i];
    const double v_a = v_b + vh_clean[i];
    frame.v_h.samples[i] = vh_clean[i] + eps * 0.5 * (v_a + v_b) + wh[i];
    frame.v_c.samples[i] = v_b + eps * 0.5 * v_b + wc[i];
    frame.v_k.samples[i] = v_k_raw[i] + wk[i];
  }
  return frame;
}

}  // namespace fhasel
