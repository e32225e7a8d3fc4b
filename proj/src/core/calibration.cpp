#include "calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace fhasel {

const char* to_string(Phase p) { return p == Phase::rising ? "rising" : "falling"; }

double PolyMap3::eval(double feature) const {
  const double u = (feature - mean) / scale;
  return ((coeffs[3] * u + coeffs[2]) * u + coeffs[1]) * u + coeffs[0];
}

namespace {

// 4x4 solve, partial pivoting, long double to keep the normal equations honest.
std::array<double, 4> solve4(long double m[4][5]) {
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::fabs((double)m[r][col]) > std::fabs((double)m[piv][col])) piv = r;
    }
    if (m[piv][col] == 0.0L) throw model_error("fit_poly3: singular normal equations");
    if (piv != col) std::swap(m[piv], m[col]);
    for (int r = col + 1; r < 4; ++r) {
      const long double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 4> x{};
  for (int r = 3; r >= 0; --r) {
    long double acc = m[r][4];
    for (int c = r + 1; c < 4; ++c) acc -= m[r][c] * x[c];
    x[r] = static_cast<double>(acc / m[r][r]);
  }
  return x;
}

PolyMap3 fit_poly3_basis(std::span<const double> features, std::span<const double> truth,
                         FeatureKind kind, double mean, double scale) {
  // Power sums of the scaled basis up to u^6.
  long double s[7] = {};
  long double b[4] = {};
  for (std::size_t i = 0; i < features.size(); ++i) {
    const long double u = (features[i] - mean) / scale;
    long double p = 1.0L;
    for (int k = 0; k < 7; ++k) {
      s[k] += p;
      if (k < 4) b[k] += p * truth[i];
      p *= u;
    }
  }
  long double m[4][5];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m[r][c] = s[r + c];
    m[r][4] = b[r];
  }
  PolyMap3 map;
  map.coeffs = solve4(m);
  map.mean = mean;
  map.scale = scale;
  map.kind = kind;
  double sse = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double r = map.eval(features[i]) - truth[i];
    sse += r * r;
  }
  map.residual_rms = std::sqrt(sse / static_cast<double>(features.size()));
  return map;
}

void check_fit_inputs(std::span<const double> features, std::span<const double> truth) {
  if (features.size() != truth.size()) {
    throw model_error("fit_poly3: feature/truth length mismatch");
  }
  if (features.size() < 4) throw model_error("fit_poly3: need at least 4 samples");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i]) || !std::isfinite(truth[i])) {
      throw model_error("fit_poly3: non-finite sample");
    }
  }
}

}  // namespace

PolyMap3 fit_poly3(std::span<const double> features, std::span<const double> truth,
                   FeatureKind kind) {
  check_fit_inputs(features, truth);
  const auto [lo_it, hi_it] = std::minmax_element(features.begin(), features.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw model_error("fit_poly3: features are constant");
  return fit_poly3_basis(features, truth, kind, 0.5 * (lo + hi), 0.5 * (hi - lo));
}

double ls_slope(std::span<const double> history) {
  const std::size_t n = history.size();
  if (n < 2) throw model_error("ls_slope: need at least 2 samples");
  const double x_mean = 0.5 * static_cast<double>(n - 1);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    num += dx * history[i];
    den += dx * dx;
  }
  return num / den;
}

Phase classify_phase(std::span<const double> history, Phase prev, double tie_tol,
                     bool hold_last_on_tie) {
  const double slope = ls_slope(history);
  if (std::fabs(slope) <= tie_tol) return hold_last_on_tie ? prev : Phase::rising;
  return slope > 0.0 ? Phase::rising : Phase::falling;
}

DualPolyMap3 fit_dual_poly3(std::span<const double> features,
                            std::span<const double> truth, FeatureKind kind,
                            const FitOptions& opt) {
  check_fit_inputs(features, truth);
  if (opt.slope_window < 2) throw model_error("fit_dual_poly3: slope_window must be >= 2");
  const auto [lo_it, hi_it] = std::minmax_element(features.begin(), features.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw model_error("fit_dual_poly3: features are constant");
  const double mean = 0.5 * (lo + hi);
  const double scale = 0.5 * (hi - lo);
  const double tie_tol = opt.tie_tol_rel * (hi - lo);

  std::vector<double> f_rise, t_rise, f_fall, t_fall;
  PhaseTracker tracker(opt.slope_window, tie_tol, opt.hold_last_on_tie);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto phase = tracker.feed(features[i]);
    if (!phase) continue;  // warm-up samples carry no classification
    if (*phase == Phase::rising) {
      f_rise.push_back(features[i]);
      t_rise.push_back(truth[i]);
    } else {
      f_fall.push_back(features[i]);
      t_fall.push_back(truth[i]);
    }
  }
  if (f_rise.size() < 4) {
    throw model_error("fit_dual_poly3: rising partition has fewer than 4 samples");
  }
  if (f_fall.size() < 4) {
    throw model_error("fit_dual_poly3: falling partition has fewer than 4 samples");
  }

  DualPolyMap3 map;
  map.rising = fit_poly3_basis(f_rise, t_rise, kind, mean, scale);
  map.falling = fit_poly3_basis(f_fall, t_fall, kind, mean, scale);
  map.slope_window = opt.slope_window;
  map.hold_last_on_tie = opt.hold_last_on_tie;
  map.slope_tie_tol = tie_tol;
  return map;
}

PhaseTracker::PhaseTracker(int window, double tie_tol, bool hold_last_on_tie)
    : window_(window), tie_tol_(tie_tol), hold_tie_(hold_last_on_tie) {
  if (window < 2) throw model_error("PhaseTracker: window must be >= 2");
  history_.reserve(static_cast<std::size_t>(window));
}

std::optional<Phase> PhaseTracker::feed(double feature) {
  if (!std::isfinite(feature)) throw model_error("PhaseTracker: non-finite feature");
  if (history_.size() == static_cast<std::size_t>(window_)) {
    history_.erase(history_.begin());
  }
  history_.push_back(feature);
  if (history_.size() < static_cast<std::size_t>(window_)) return std::nullopt;
  prev_ = classify_phase(history_, prev_, tie_tol_, hold_tie_);
  primed_ = true;
  return prev_;
}

void PhaseTracker::reset() {
  history_.clear();
  prev_ = Phase::rising;
  primed_ = false;
}

ClampRange estimate_clamp(double span_max) {
  if (!(span_max > 0.0)) throw model_error("estimate_clamp: span must be > 0");
  return {-0.05 * span_max, 1.05 * span_max};
}

double estimate_displacement(const PolyMap3& map, double feature, ClampRange clamp) {
  if (!std::isfinite(feature)) throw model_error("estimate_displacement: non-finite feature");
  return std::clamp(map.eval(feature), clamp.lo, clamp.hi);
}

double estimate_displacement(const DualPolyMap3& map, double feature,
                             PhaseTracker& tracker, ClampRange clamp) {
  if (!std::isfinite(feature)) throw model_error("estimate_displacement: non-finite feature");
  const auto phase = tracker.feed(feature);
  const PolyMap3& branch =
      (phase.value_or(Phase::rising) == Phase::rising) ? map.rising : map.falling;
  return std::clamp(branch.eval(feature), clamp.lo, clamp.hi);
}

namespace {

std::string serialize_header(const PolyMap3& ref) {
  std::string out;
  out += "kind,";
  out += to_string(ref.kind);
  out += "\nmean,";
  out += format_sig12(ref.mean);
  out += "\nscale,";
  out += format_sig12(ref.scale);
  out += "\nbranch,c0,c1,c2,c3\n";
  return out;
}

void append_branch(std::string& out, const char* name, const PolyMap3& map) {
  out += name;
  for (double c : map.coeffs) {
    out += ',';
    out += format_sig12(c);
  }
  out += '\n';
}

}  // namespace

std::string serialize_map(const PolyMap3& map) {
  std::string out = serialize_header(map);
  append_branch(out, "single", map);
  return out;
}

std::string serialize_map(const DualPolyMap3& map) {
  std::string out = serialize_header(map.rising);
  append_branch(out, "rising", map.rising);
  append_branch(out, "falling", map.falling);
  return out;
}

void save_map(const std::string& path, const PolyMap3& map) {
  atomic_write_text(path, serialize_map(map));
}

void save_map(const std::string& path, const DualPolyMap3& map) {
  atomic_write_text(path, serialize_map(map));
}

LoadedMap load_map(const std::string& path, const FitOptions& opt) {
  std::ifstream in(path);
  if (!in) throw model_error("cannot open map file: " + path);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw model_error("map file truncated: " + path);
    return line;
  };
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };

  auto kind_row = split(next_line());
  if (kind_row.size() != 2 || kind_row[0] != "kind") {
    throw model_error("map file: expected kind header");
  }
  const FeatureKind kind = feature_kind_from_string(kind_row[1]);
  auto mean_row = split(next_line());
  auto scale_row = split(next_line());
  if (mean_row.size() != 2 || mean_row[0] != "mean" || scale_row.size() != 2 ||
      scale_row[0] != "scale") {
    throw model_error("map file: expected mean and scale headers");
  }
  const double mean = std::stod(mean_row[1]);
  const double scale = std::stod(scale_row[1]);
  if (!(scale > 0.0)) throw model_error("map file: scale must be > 0");
  if (split(next_line()) != std::vector<std::string>{"branch", "c0", "c1", "c2", "c3"}) {
    throw model_error("map file: expected branch column header");
  }

  auto parse_branch = [&](const std::vector<std::string>& row) {
    PolyMap3 m;
    m.kind = kind;
    m.mean = mean;
    m.scale = scale;
    for (int i = 0; i < 4; ++i) m.coeffs[static_cast<std::size_t>(i)] = std::stod(row[static_cast<std::size_t>(i) + 1]);
    return m;
  };

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parts = split(line);
    if (parts.size() != 5) throw model_error("map file: malformed branch row");
    rows.push_back(std::move(parts));
  }
  LoadedMap loaded;
  if (rows.size() == 1 && rows[0][0] == "single") {
    loaded.dual = false;
    loaded.single = parse_branch(rows[0]);
  } else if (rows.size() == 2 && rows[0][0] == "rising" && rows[1][0] == "falling") {
    loaded.dual = true;
    loaded.dual_map.rising = parse_branch(rows[0]);
    loaded.dual_map.falling = parse_branch(rows[1]);
    loaded.dual_map.slope_window = opt.slope_window;
    loaded.dual_map.hold_last_on_tie = opt.hold_last_on_tie;
    loaded.dual_map.slope_tie_tol = opt.tie_tol_rel * 2.0 * scale;
  } else {
    throw model_error("map file: expected one single row or rising+falling rows");
  }
  return loaded;
}

}  // namespace fhasel
