#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "core/calibration.hpp"
#include "core/errors.hpp"

using namespace fhasel;

namespace {

// triangle sweep with distinct up/down truth maps, the shape a lagging
// capacitance produces
struct Loop {
  std::vector<double> f, truth;
};

Loop hysteresis_loop(int n_half) {
  Loop loop;
  for (int i = 0; i <= n_half; ++i) {
    const double x = static_cast<double>(i) / n_half;  // 0 -> 1
    loop.f.push_back(2.0 + x);
    loop.truth.push_back(1e-3 * (x + 0.08 * x * (1.0 - x)));
  }
  for (int i = 1; i <= n_half; ++i) {
    const double x = 1.0 - static_cast<double>(i) / n_half;  // 1 -> 0
    loop.f.push_back(2.0 + x);
    loop.truth.push_back(1e-3 * (x - 0.08 * x * (1.0 - x)));
  }
  return loop;
}

double sse(const PolyMap3& m, const std::vector<double>& f,
           const std::vector<double>& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = m.eval(f[i]) - t[i];
    acc += r * r;
  }
  return acc;
}

}  // namespace

TEST_CASE("cubic fit reproduces an exact cubic relation") {
  std::vector<double> f, t;
  for (int i = 0; i <= 40; ++i) {
    const double x = 2.0 + 2.0 * i / 40.0;  // feature range [2, 4]
    const double u = x - 3.0;               // centered by construction
    f.push_back(x);
    t.push_back(1.5e-3 + 2e-3 * u - 0.7e-3 * u * u + 0.3e-3 * u * u * u);
  }
  const PolyMap3 map = fit_poly3(f, t, FeatureKind::voltage);
  CHECK(map.mean == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(map.scale == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(map.eval(f[i]) == doctest::Approx(t[i]).epsilon(1e-9));
  }
  CHECK(map.residual_rms < 1e-12);
}

TEST_CASE("fitted coefficients sit at the least-squares optimum") {
  std::mt19937_64 eng(11);
  std::normal_distribution<double> noise(0.0, 1e-5);
  std::vector<double> f, t;
  for (int i = 0; i <= 200; ++i) {
    const double x = static_cast<double>(i) / 200.0;
    f.push_back(x);
    t.push_back(5e-3 * x * x + noise(eng));
  }
  const PolyMap3 map = fit_poly3(f, t, FeatureKind::voltage);
  const double best = sse(map, f, t);
  for (int k = 0; k < 4; ++k) {
    for (double d : {-1e-3, 1e-3}) {
      PolyMap3 poked = map;
      poked.coeffs[k] += d * std::max(1.0, std::fabs(map.coeffs[k]));
      CHECK(sse(poked, f, t) > best);
    }
  }
}

TEST_CASE("fit rejects degenerate inputs") {
  std::vector<double> f = {1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<double> t = {1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK_THROWS_AS(fit_poly3(f, t, FeatureKind::voltage), model_error);
  std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_poly3(three, three, FeatureKind::voltage), model_error);
}

TEST_CASE("slope estimate and phase classification") {
  std::vector<double> line = {1.0, 1.5, 2.0, 2.5, 3.0};
  CHECK(ls_slope(line) == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<double> flat = {2.0, 2.0, 2.0};
  CHECK(ls_slope(flat) == doctest::Approx(0.0));

  CHECK(classify_phase(line, Phase::falling, 0.0, true) == Phase::rising);
  std::vector<double> down = {3.0, 2.0, 1.0};
  CHECK(classify_phase(down, Phase::rising, 0.0, true) == Phase::falling);
  // inside the dead band the previous phase holds, or rising without the hold
  CHECK(classify_phase(flat, Phase::falling, 1e-9, true) == Phase::falling);
  CHECK(classify_phase(flat, Phase::falling, 1e-9, false) == Phase::rising);
}

TEST_CASE("phase tracker primes after its window and can be reset") {
  PhaseTracker tr(3, 0.0, true);
  CHECK(!tr.feed(1.0).has_value());
  CHECK(!tr.feed(2.0).has_value());
  auto p = tr.feed(3.0);
  REQUIRE(p.has_value());
  CHECK(*p == Phase::rising);
  p = tr.feed(2.0);
  REQUIRE(p.has_value());
  tr.reset();
  CHECK(!tr.feed(5.0).has_value());
}

TEST_CASE("dual fit separates the branches of a hysteresis loop") {
  const Loop loop = hysteresis_loop(60);
  FitOptions opt;
  const DualPolyMap3 dual = fit_dual_poly3(loop.f, loop.truth, FeatureKind::voltage, opt);
  const PolyMap3 single = fit_poly3(loop.f, loop.truth, FeatureKind::voltage);

  // causal replay: the dual map must beat the single fit on its own data
  PhaseTracker tr(dual.slope_window, dual.slope_tie_tol, dual.hold_last_on_tie);
  const ClampRange clamp = estimate_clamp(2e-3);
  double sse_dual = 0.0, sse_single = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < loop.f.size(); ++i) {
    const double est = estimate_displacement(dual, loop.f[i], tr, clamp);
    if (i + 1 < static_cast<std::size_t>(dual.slope_window)) continue;  // warm-up
    const double rd = est - loop.truth[i];
    const double rs = estimate_displacement(single, loop.f[i], clamp) - loop.truth[i];
    sse_dual += rd * rd;
    sse_single += rs * rs;
    ++counted;
  }
  REQUIRE(counted > 0);
  CHECK(sse_dual < 0.25 * sse_single);
}

TEST_CASE("dual fit needs samples in both branches") {
  std::vector<double> f, t;
  for (int i = 0; i < 40; ++i) {
    f.push_back(static_cast<double>(i));
    t.push_back(static_cast<double>(i) * 1e-4);
  }
  FitOptions opt;
  CHECK_THROWS_AS(fit_dual_poly3(f, t, FeatureKind::voltage, opt), model_error);
}

TEST_CASE("branches collapse to the single map when the loop is closed") {
  // same truth both directions, so rising and falling see the same relation
  std::vector<double> f, t;
  for (int i = 0; i <= 50; ++i) {
    const double x = static_cast<double>(i) / 50.0;
    f.push_back(x);
    t.push_back(3e-3 * x * x);
  }
  for (int i = 1; i <= 50; ++i) {
    const double x = 1.0 - static_cast<double>(i) / 50.0;
    f.push_back(x);
    t.push_back(3e-3 * x * x);
  }
  FitOptions opt;
  const DualPolyMap3 dual = fit_dual_poly3(f, t, FeatureKind::voltage, opt);
  for (double x : {0.1, 0.4, 0.7, 0.95}) {
    CHECK(dual.rising.eval(x) == doctest::Approx(dual.falling.eval(x)).epsilon(1e-6));
  }
}

TEST_CASE("estimates are clamped to a tolerance band around the stroke") {
  const ClampRange clamp = estimate_clamp(6e-3);
  CHECK(clamp.lo == doctest::Approx(-3e-4).epsilon(1e-12));
  CHECK(clamp.hi == doctest::Approx(6.3e-3).epsilon(1e-12));
  PolyMap3 wild;
  wild.coeffs = {1.0, 0.0, 0.0, 0.0};  // far above the band
  CHECK(estimate_displacement(wild, 0.0, clamp) == clamp.hi);
  wild.coeffs = {-1.0, 0.0, 0.0, 0.0};
  CHECK(estimate_displacement(wild, 0.0, clamp) == clamp.lo);
}

TEST_CASE("map files round-trip through disk for single and dual maps") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fhasel_map_roundtrip";
  fs::create_directories(dir);

  const Loop loop = hysteresis_loop(60);
  FitOptions opt;
  const DualPolyMap3 dual = fit_dual_poly3(loop.f, loop.truth, FeatureKind::voltage, opt);
  const PolyMap3 single = fit_poly3(loop.f, loop.truth, FeatureKind::impedance);

  const std::string p_single = (dir / "single.csv").string();
  const std::string p_dual = (dir / "dual.csv").string();
  save_map(p_single, single);
  save_map(p_dual, dual);

  const LoadedMap ls = load_map(p_single, opt);
  REQUIRE(!ls.dual);
  CHECK(ls.single.kind == FeatureKind::impedance);
  const LoadedMap ld = load_map(p_dual, opt);
  REQUIRE(ld.dual);
  for (double x : {2.05, 2.4, 2.8, 2.97}) {
    CHECK(ls.single.eval(x) == doctest::Approx(single.eval(x)).epsilon(1e-9));
    CHECK(ld.dual_map.rising.eval(x) == doctest::Approx(dual.rising.eval(x)).epsilon(1e-9));
    CHECK(ld.dual_map.falling.eval(x) ==
          doctest::Approx(dual.falling.eval(x)).epsilon(1e-9));
  }
  fs::remove_all(dir);
}
