#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"

using namespace fhasel;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const validation_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty text parses to the built-in defaults") {
  const SimConfig cfg = parse_config_text("");
  CHECK(cfg.actuator.q_max == doctest::Approx(6e-3));
  CHECK(cfg.circuit.f_sense == doctest::Approx(2e3));
  CHECK(cfg.estimation.window == 200);
  CHECK(cfg.scenario.seed == 1234);
  CHECK(cfg.scenario.actuation == Actuation::sine);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("sections route values and tolerate comments") {
  const SimConfig cfg = parse_config_text(
      "# leading comment\n"
      "[actuator]\n"
      "q_max = 5e-3   ; trailing note\n"
      "[circuit]\n"
      "cmrr_db = inf\n"
      "[scenario]\n"
      "actuation = step\n"
      "method = impedance\n"
      "mapping = dual\n"
      "sweep_freqs_hz = 1, 2, 5\n"
      "negate_drive = true\n"
      "[mux]\n"
      "n_channels = 3\n"
      "order = 2,0,1\n");
  CHECK(cfg.actuator.q_max == doctest::Approx(5e-3));
  CHECK(std::isinf(cfg.circuit.cmrr_db));
  CHECK(cfg.scenario.actuation == Actuation::step);
  CHECK(cfg.scenario.method == Method::impedance);
  CHECK(cfg.scenario.mapping == Mapping::dual);
  REQUIRE(cfg.scenario.sweep_freqs_hz.size() == 3);
  CHECK(cfg.scenario.sweep_freqs_hz[1] == doctest::Approx(2.0));
  CHECK(cfg.scenario.negate_drive);
  CHECK(cfg.mux.n_channels == 3);
  REQUIRE(cfg.mux.order.size() == 3);
  CHECK(cfg.mux.order[0] == 2);
}

TEST_CASE("parser reports the offending line") {
  const std::string no_section = message_of([] { parse_config_text("q_max = 1\n"); });
  CHECK(no_section.find("line 1") != std::string::npos);

  const std::string bad_pair =
      message_of([] { parse_config_text("[actuator]\n\nq_max 5e-3\n"); });
  CHECK(bad_pair.find("line 3") != std::string::npos);

  const std::string bad_header = message_of([] { parse_config_text("[actuator\n"); });
  CHECK(bad_header.find("malformed section") != std::string::npos);
}

TEST_CASE("unknown keys and sections are rejected by name") {
  SimConfig cfg;
  const std::string bad_key = message_of([&] { cfg.set("actuator.bogus", "1"); });
  CHECK(bad_key.find("unknown key 'bogus'") != std::string::npos);
  const std::string bad_section = message_of([&] { cfg.set("nope.q_max", "1"); });
  CHECK(bad_section.find("unknown section [nope]") != std::string::npos);
  CHECK_THROWS_AS(cfg.set("flat_key", "1"), validation_error);
  CHECK_THROWS_AS(cfg.set("actuator.q_max", "abc"), validation_error);
}

TEST_CASE("set routes the same paths the parser uses") {
  SimConfig cfg;
  cfg.set("scenario.freq_hz", "2.5");
  cfg.set("noise.enabled", "false");
  cfg.set("estimation.moving_average", "3");
  CHECK(cfg.scenario.freq_hz == doctest::Approx(2.5));
  CHECK(!cfg.circuit.noise.enabled);
  CHECK(cfg.estimation.moving_average == 3);
}

TEST_CASE("validation enforces the supply ceiling and period coverage") {
  SimConfig cfg;
  cfg.scenario.amplitude_kv = 2.0;
  cfg.scenario.offset_kv = 4.5;  // peak 6.5 kV
  CHECK_THROWS_AS(cfg.validate(), validation_error);

  cfg = SimConfig{};
  cfg.scenario.freq_hz = 1.0;
  cfg.scenario.duration_s = 5.0;  // < 10 periods after settle
  cfg.scenario.settle_s = 0.5;
  CHECK_THROWS_AS(cfg.validate(), validation_error);

  cfg = SimConfig{};
  cfg.scenario.duration_s = 10.5;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("RMS window must hold whole sensing periods") {
  SimConfig cfg;
  cfg.estimation.window = 130;  // 2.6 periods at 2 kHz / 100 kHz
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.estimation.window = 150;  // 3 periods
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("joint session limits are validated") {
  SimConfig cfg;
  cfg.scenario.actuation = Actuation::joints;
  cfg.mux.n_channels = 4;
  CHECK_NOTHROW(cfg.validate());
  cfg.scenario.joints.theta_max_deg = 170.0;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
  cfg.scenario.joints.theta_max_deg = 90.0;
  cfg.scenario.joints.v_hold_kv = 6.5;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
}

TEST_CASE("metadata lists every effective setting plus the model conventions") {
  SimConfig cfg;
  cfg.set("scenario.freq_hz", "2.5");
  const auto md = cfg.metadata();
  auto value_of = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : md) {
      if (k == key) return v;
    }
    return "<missing>";
  };
  CHECK(value_of("scenario.freq_hz") == "2.5");
  CHECK(value_of("actuator.q_max") == "0.006");
  CHECK(value_of("estimation.window") == "200");
  CHECK(value_of("model.truth_alignment") == "window_mean");
  CHECK(value_of("model.hysteresis") == "first_order_capacitance_lag");
}

TEST_CASE("missing config files are reported as validation failures") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.ini"), validation_error);
}
