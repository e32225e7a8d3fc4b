#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace fhasel {

double nrmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw model_error("nrmse: length mismatch");
  if (estimate.empty()) throw model_error("nrmse: empty streams");
  double lo = truth[0], hi = truth[0], sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!std::isfinite(estimate[i]) || !std::isfinite(truth[i])) {
      throw model_error("nrmse: non-finite sample");
    }
    lo = std::min(lo, truth[i]);
    hi = std::max(hi, truth[i]);
    const double r = estimate[i] - truth[i];
    sse += r * r;
  }
  const double range = hi - lo;
  if (!(range > 0.0)) throw model_error("nrmse: truth is constant, range undefined");
  return std::sqrt(sse / static_cast<double>(truth.size())) / range;
}

SineFit fit_sine(std::span<const double> values, double rate, double t0, double f) {
  if (values.size() < 8) throw model_error("fit_sine: too few samples");
  if (!(rate > 0.0) || !(f > 0.0)) throw model_error("fit_sine: rate and f must be > 0");
  const double w = 2.0 * std::numbers::pi * f;
  // Normal equations for x ~ dc + a cos(wt) + b sin(wt).
  double s_c = 0, s_s = 0, s_cc = 0, s_ss = 0, s_cs = 0, s_x = 0, s_xc = 0, s_xs = 0;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = t0 + static_cast<double>(i) / rate;
    const double c = std::cos(w * t), s = std::sin(w * t);
    const double x = values[i];
    if (!std::isfinite(x)) throw model_error("fit_sine: non-finite sample");
    s_c += c;
    s_s += s;
    s_cc += c * c;
    s_ss += s * s;
    s_cs += c * s;
    s_x += x;
    s_xc += x * c;
    s_xs += x * s;
  }
  // Solve the 3x3 system [n s_c s_s; s_c s_cc s_cs; s_s s_cs s_ss].
  double m[3][4] = {{n, s_c, s_s, s_x}, {s_c, s_cc, s_cs, s_xc}, {s_s, s_cs, s_ss, s_xs}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    if (m[piv][col] == 0.0) throw model_error("fit_sine: degenerate projection");
    std::swap(m[piv], m[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double fac = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= fac * m[col][c];
    }
  }
  double sol[3];
  for (int r = 2; r >= 0; --r) {
    double acc = m[r][3];
    for (int c = r + 1; c < 3; ++c) acc -= m[r][c] * sol[c];
    sol[r] = acc / m[r][r];
  }
  SineFit fit;
  fit.dc = sol[0];
  const double a = sol[1], b = sol[2];  // a cos + b sin = A sin(wt + phi)
  fit.amplitude = std::hypot(a, b);
  fit.phase_rad = std::atan2(a, b);
  return fit;
}

double phase_lag_deg(std::span<const double> estimate, std::span<const double> truth,
                     double rate, double t0, double f_act) {
  if (estimate.size() != truth.size()) throw model_error("phase_lag: length mismatch");
  if (!(rate > 0.0) || !(f_act > 0.0)) throw model_error("phase_lag: rate and f must be > 0");
  const double duration = static_cast<double>(estimate.size()) / rate;
  if (duration * f_act < 5.0) {
    throw model_error("phase_lag: streams must cover at least 5 actuation periods");
  }
  const SineFit fe = fit_sine(estimate, rate, t0, f_act);
  const SineFit ft = fit_sine(truth, rate, t0, f_act);
  auto rms_about_mean = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double floor_e = 1e-6 * rms_about_mean(estimate) + 1e-15;
  const double floor_t = 1e-6 * rms_about_mean(truth) + 1e-15;
  if (fe.amplitude <= floor_e || ft.amplitude <= floor_t) {
    throw model_error("phase_lag: no component at f_act above the noise floor");
  }
  double diff = (ft.phase_rad - fe.phase_rad) * 180.0 / std::numbers::pi;
  while (diff > 180.0) diff -= 360.0;
  while (diff <= -180.0) diff += 360.0;
  return diff;
}

}  // namespace fhasel
