#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "core/circuit.hpp"
#include "core/errors.hpp"

using namespace fhasel;

namespace {

SignalTrace sense_input(const CircuitParams& p, double seconds) {
  SignalTrace v;
  v.fs = p.fs;
  v.t0 = 0.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * p.fs));
  v.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.samples[i] = p.a_sense * std::sin(2.0 * M_PI * p.f_sense *
                                        (static_cast<double>(i) / p.fs));
  }
  return v;
}

double rms_tail(const std::vector<double>& v, std::size_t from) {
  double acc = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(v.size() - from));
}

}  // namespace

TEST_CASE("cutoff frequency matches the series RC formula") {
  // frozen reference point, long double arithmetic
  CHECK(cutoff_frequency(2e6, 1e5, 100e-12) ==
        doctest::Approx(757.8806813899778).epsilon(1e-12));
  CHECK(cutoff_frequency(0.0, 1e5, 1e-9) ==
        doctest::Approx(1591.5494309189533).epsilon(1e-12));
  CHECK_THROWS_AS(cutoff_frequency(0.0, 0.0, 1e-9), model_error);
  CHECK_THROWS_AS(cutoff_frequency(1e6, 1e5, 0.0), model_error);
}

TEST_CASE("phasor gains at the frozen operating point") {
  CircuitParams p;
  const SteadyStateGains g = steady_state_gains(2000.0, p, 1e5, 500e-12);
  CHECK(g.gain_vh == doctest::Approx(0.08925049921186817).epsilon(1e-12));
  CHECK(g.gain_vc == doctest::Approx(0.4748287606147257).epsilon(1e-12));
  // both phases follow from the same loop impedance
  const std::complex<double> z_e(1e5, -1.0 / (2.0 * M_PI * 2000.0 * 500e-12));
  const std::complex<double> z_tot = z_e + std::complex<double>(p.r_n + p.r_c, 0.0);
  CHECK(g.phase_vc == doctest::Approx(-std::arg(z_tot)).epsilon(1e-12));
  CHECK(g.phase_vh == doctest::Approx(std::arg(z_e) - std::arg(z_tot)).epsilon(1e-12));
}

TEST_CASE("transient settles onto the analytic steady-state gains") {
  CircuitParams p;
  p.noise.enabled = false;
  const SignalTrace v_in = sense_input(p, 0.5);
  const std::vector<double> c_e(v_in.samples.size(), 100e-12);
  const SensingFrame f = simulate_sensing_path(c_e, v_in, p, 1e5, false);
  const SteadyStateGains g = steady_state_gains(p.f_sense, p, 1e5, 100e-12);
  const std::size_t half = v_in.samples.size() / 2;  // 500 whole periods left
  const double a_rms = p.a_sense / std::sqrt(2.0);
  CHECK(rms_tail(f.v_h.samples, half) == doctest::Approx(g.gain_vh * a_rms).epsilon(5e-4));
  CHECK(rms_tail(f.v_c.samples, half) == doctest::Approx(g.gain_vc * a_rms).epsilon(5e-4));
}

TEST_CASE("substep refinement stays consistent with the coarse integrator") {
  CircuitParams p4;
  p4.noise.enabled = false;
  CircuitParams p1 = p4;
  p1.substeps = 1;
  const SignalTrace v_in = sense_input(p4, 0.2);
  const std::vector<double> c_e(v_in.samples.size(), 150e-12);
  const SensingFrame a = simulate_sensing_path(c_e, v_in, p4, 1e5, false);
  const SensingFrame b = simulate_sensing_path(c_e, v_in, p1, 1e5, false);
  const std::size_t half = v_in.samples.size() / 2;
  CHECK(rms_tail(a.v_h.samples, half) ==
        doctest::Approx(rms_tail(b.v_h.samples, half)).epsilon(5e-3));
  CHECK(rms_tail(a.v_c.samples, half) ==
        doctest::Approx(rms_tail(b.v_c.samples, half)).epsilon(5e-3));
}

TEST_CASE("noise is reproducible from the seed and independent across streams") {
  CircuitParams p;
  p.noise.seed = 99;
  const SignalTrace v_in = sense_input(p, 0.05);
  const std::vector<double> c_e(v_in.samples.size(), 100e-12);
  const std::vector<double> drive(v_in.samples.size(), 4.8);
  const SensingFrame a = simulate_sensing_path(c_e, v_in, p, 1e5, true, drive);
  const SensingFrame b = simulate_sensing_path(c_e, v_in, p, 1e5, true, drive);
  CHECK(a.v_h.samples == b.v_h.samples);
  CHECK(a.v_c.samples == b.v_c.samples);
  CHECK(a.v_k.samples == b.v_k.samples);

  CircuitParams other = p;
  other.noise.seed = 100;
  const SensingFrame c = simulate_sensing_path(c_e, v_in, other, 1e5, true, drive);
  CHECK(a.v_h.samples != c.v_h.samples);
}

TEST_CASE("drive polarity never reaches the sensing outputs") {
  CircuitParams p;
  p.noise.seed = 7;
  const SignalTrace v_in = sense_input(p, 0.05);
  const std::vector<double> c_e(v_in.samples.size(), 80e-12);
  std::vector<double> pos(v_in.samples.size()), neg(v_in.samples.size());
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> amp(0.5, 5.5);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    pos[i] = amp(eng);
    neg[i] = -pos[i];
  }
  const SensingFrame a = simulate_sensing_path(c_e, v_in, p, 1e5, true, pos);
  const SensingFrame b = simulate_sensing_path(c_e, v_in, p, 1e5, true, neg);
  CHECK(a.v_h.samples == b.v_h.samples);
  CHECK(a.v_c.samples == b.v_c.samples);
  CHECK(a.v_k.samples == b.v_k.samples);
}

TEST_CASE("instrumentation amp leaks common mode per its CMRR") {
  SignalTrace plus, minus;
  plus.fs = minus.fs = 1e5;
  plus.samples = {1.0, 2.0, 3.0};
  minus.samples = {1.0, 2.0, 3.0};
  const SignalTrace leak = instrumentation_amp(plus, minus, 80.0);
  CHECK(leak.samples[0] == doctest::Approx(1e-4 * 1.0).epsilon(1e-12));
  CHECK(leak.samples[2] == doctest::Approx(1e-4 * 3.0).epsilon(1e-12));
  const SignalTrace ideal = instrumentation_amp(plus, minus, INFINITY);
  CHECK(ideal.samples[0] == 0.0);
  CHECK(ideal.samples[2] == 0.0);

  minus.samples = {0.5, 1.0, 1.5};
  const SignalTrace diff = instrumentation_amp(plus, minus, INFINITY);
  CHECK(diff.samples[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circuit validation enforces symmetry and sampling limits") {
  CircuitParams p;
  CHECK_NOTHROW(p.validate());
  p.r_c = 2e6;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CircuitParams{};
  p.fs = 10.0 * p.f_sense;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CircuitParams{};
  p.noise.tone_hz = p.fs;  // above Nyquist
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CircuitParams{};
  p.substeps = 0;
  CHECK_THROWS_AS(p.validate(), validation_error);
}
