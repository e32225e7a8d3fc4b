#pragma once

#include <span>

namespace fhasel {

// RMSE normalized by the truth range (max - min). Error on constant truth.
double nrmse(std::span<const double> estimate, std::span<const double> truth);

struct SineFit {
  double amplitude = 0.0;
  double phase_rad = 0.0;  // x(t) ~ amplitude * sin(w t + phase) + dc
  double dc = 0.0;
};

// Least-squares projection of a uniformly sampled stream onto {1, cos, sin}
// at frequency f. Robust single-bin estimate, tolerant of non-integer period
// counts.
SineFit fit_sine(std::span<const double> values, double rate, double t0, double f);

// Truth phase minus estimate phase at the actuation frequency, wrapped to
// (-180, 180]. Positive = estimate lags truth. Errors when either stream
// covers fewer than 5 periods or carries no component at f.
double phase_lag_deg(std::span<const double> estimate, std::span<const double> truth,
                     double rate, double t0, double f_act);

}  // namespace fhasel
