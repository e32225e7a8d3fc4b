#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/estimation.hpp"

using namespace fhasel;

namespace {

SignalTrace trace_of(std::vector<double> samples, double fs = 1e5, double t0 = 0.0) {
  SignalTrace t;
  t.samples = std::move(samples);
  t.fs = fs;
  t.t0 = t0;
  return t;
}

}  // namespace

TEST_CASE("windowed RMS reduces whole windows and stamps their centers") {
  RmsConfig cfg;  // 200 samples per window
  std::vector<double> flat(450, 2.0);
  const FeatureStream f = windowed_rms(trace_of(flat), cfg);
  REQUIRE(f.values.size() == 2);  // trailing 50 samples discarded
  CHECK(f.values[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.values[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.rate == doctest::Approx(500.0).epsilon(1e-12));
  CHECK(f.t0 == doctest::Approx(199.0 / (2.0 * 1e5)).epsilon(1e-12));
  CHECK(f.time_at(1) - f.time_at(0) == doctest::Approx(1.0 / 500.0).epsilon(1e-12));

  // sine spanning whole periods per window comes out at amplitude / sqrt(2)
  std::vector<double> sine(600);
  for (std::size_t i = 0; i < sine.size(); ++i) {
    sine[i] = 3.0 * std::sin(2.0 * M_PI * 2000.0 * (static_cast<double>(i) / 1e5));
  }
  const FeatureStream s = windowed_rms(trace_of(sine), cfg);
  for (double v : s.values) CHECK(v == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("windowed mean averages each block") {
  RmsConfig cfg;
  cfg.window = 4;
  const FeatureStream f = windowed_mean(trace_of({1, 2, 3, 4, 10, 10, 10, 10}), cfg);
  REQUIRE(f.values.size() == 2);
  CHECK(f.values[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.values[1] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("impedance magnitude and its capacitance inverse invert each other") {
  CHECK(impedance_magnitude(2.0, 1.0, 1e6, 1e-6) == doctest::Approx(2e6).epsilon(1e-12));
  CHECK_THROWS_AS(impedance_magnitude(2.0, 1e-7, 1e6, 1e-6), model_error);
  CHECK_THROWS_AS(impedance_magnitude(-1.0, 1.0, 1e6, 1e-6), model_error);

  const double r_e = 1e5, f = 2e3, c = 230e-12;
  const double z = std::hypot(r_e, 1.0 / (2.0 * M_PI * f * c));
  CHECK(capacitance_from_impedance(z, r_e, f) == doctest::Approx(c).epsilon(1e-12));
  CHECK_THROWS_AS(capacitance_from_impedance(r_e, r_e, f), model_error);
}

TEST_CASE("impedance stream is the elementwise ratio tagged as impedance") {
  FeatureStream vh, vc;
  vh.rate = vc.rate = 500.0;
  vh.values = {1.0, 2.0};
  vc.values = {2.0, 2.0};
  const FeatureStream z = impedance_stream(vh, vc, 1e6, 1e-6);
  CHECK(z.kind == FeatureKind::impedance);
  CHECK(z.values[0] == doctest::Approx(5e5).epsilon(1e-12));
  CHECK(z.values[1] == doctest::Approx(1e6).epsilon(1e-12));

  vc.values = {2.0};
  CHECK_THROWS_AS(impedance_stream(vh, vc, 1e6, 1e-6), model_error);
}

TEST_CASE("voltage feature is a passthrough with the voltage tag") {
  FeatureStream vh;
  vh.rate = 500.0;
  vh.kind = FeatureKind::impedance;  // wrong tag on purpose
  vh.values = {1.5, 2.5};
  const FeatureStream v = voltage_feature(vh);
  CHECK(v.kind == FeatureKind::voltage);
  CHECK(v.values == vh.values);
}

TEST_CASE("moving average keeps edges and length") {
  FeatureStream in;
  in.rate = 500.0;
  in.values = {1.0, 2.0, 3.0, 4.0, 5.0};
  const FeatureStream out = moving_average(in, 3);
  REQUIRE(out.values.size() == in.values.size());
  CHECK(out.values[0] == doctest::Approx((1.0 + 2.0) / 2.0).epsilon(1e-12));
  CHECK(out.values[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(out.values[4] == doctest::Approx((4.0 + 5.0) / 2.0).epsilon(1e-12));
  CHECK(moving_average(in, 1).values == in.values);
  CHECK_THROWS_AS(moving_average(in, 0), model_error);
}

TEST_CASE("window config validation") {
  RmsConfig cfg;
  cfg.window = 1;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg = RmsConfig{};
  cfg.vc_floor_v = 0.0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
}
