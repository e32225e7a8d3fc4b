#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trace.hpp"

namespace fhasel {

enum class Phase { rising, falling };

const char* to_string(Phase p);

// Cubic map from a centered/scaled feature to displacement. Features are
// normalized as u = (x - mean) / scale with mean/scale taken from the min-max
// midpoint and half-range of the calibration set, so u spans [-1, 1] there.
struct PolyMap3 {
  std::array<double, 4> coeffs{};  // c0 + c1 u + c2 u^2 + c3 u^3
  double mean = 0.0;
  double scale = 1.0;
  FeatureKind kind = FeatureKind::voltage;
  double residual_rms = 0.0;  // training residual, informational

  double eval(double feature) const;
};

// Rising/falling branch pair sharing one normalization, selected at run time
// by the recent feature slope.
struct DualPolyMap3 {
  PolyMap3 rising;
  PolyMap3 falling;
  int slope_window = 5;
  bool hold_last_on_tie = true;
  double slope_tie_tol = 0.0;  // per-sample slope threshold, from the fit range
};

struct FitOptions {
  int slope_window = 5;
  double tie_tol_rel = 1e-6;  // of the calibration feature range
  bool hold_last_on_tie = true;
};

// Least-squares cubic. Throws when fewer than 4 aligned samples or when the
// features are constant (rank-deficient basis).
PolyMap3 fit_poly3(std::span<const double> features, std::span<const double> truth,
                   FeatureKind kind);

// Least-squares slope of the most recent `window` samples, in feature units
// per sample. history.size() must be >= window.
double ls_slope(std::span<const double> history);

// Slope sign with a dead band: |slope| <= tie_tol keeps `prev`.
Phase classify_phase(std::span<const double> history, Phase prev, double tie_tol,
                     bool hold_last_on_tie);

// Streams features through classify_phase and fits one branch per phase.
// Errors when either partition ends up with fewer than 4 samples.
DualPolyMap3 fit_dual_poly3(std::span<const double> features,
                            std::span<const double> truth, FeatureKind kind,
                            const FitOptions& opt);

// Causal phase tracker used when evaluating a dual map sample by sample.
class PhaseTracker {
 public:
  PhaseTracker(int window, double tie_tol, bool hold_last_on_tie);

  // Returns the phase once `window` samples have been seen.
  std::optional<Phase> feed(double feature);
  void reset();

 private:
  std::vector<double> history_;
  int window_;
  double tie_tol_;
  bool hold_tie_;
  Phase prev_ = Phase::rising;
  bool primed_ = false;
};

struct ClampRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Displacement clamp handed to estimates: [-0.05, 1.05] of full span.
ClampRange estimate_clamp(double span_max);

double estimate_displacement(const PolyMap3& map, double feature, ClampRange clamp);
// Dual-map variant; uses the tracker's current classification and falls back
// to the rising branch until the tracker is primed.
double estimate_displacement(const DualPolyMap3& map, double feature,
                             PhaseTracker& tracker, ClampRange clamp);

// Map file, one of:
//   kind,<voltage|impedance>\n mean,<v>\n scale,<v>\n branch,c0,c1,c2,c3\n
//   single,...    (or rising,... + falling,...)
std::string serialize_map(const PolyMap3& map);
std::string serialize_map(const DualPolyMap3& map);
void save_map(const std::string& path, const PolyMap3& map);
void save_map(const std::string& path, const DualPolyMap3& map);

struct LoadedMap {
  bool dual = false;
  PolyMap3 single;
  DualPolyMap3 dual_map;
};
LoadedMap load_map(const std::string& path, const FitOptions& opt);

}  // namespace fhasel
