#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "fhasel/fhasel.h"

namespace {

struct Session {
  fhasel_session* s = nullptr;
  Session() { REQUIRE(fhasel_open(&s) == FHASEL_OK); }
  ~Session() { fhasel_close(s); }
};

std::filesystem::path temp_config(const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "fhasel_capi";
  std::filesystem::create_directories(dir);
  const auto path = dir / "session.ini";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("library identifies itself") {
  REQUIRE(fhasel_version() != nullptr);
  CHECK(std::strcmp(fhasel_version(), "0.1.0") == 0);
}

TEST_CASE("null handles are rejected without crashing") {
  CHECK(fhasel_open(nullptr) == FHASEL_ERR_VALIDATION);
  fhasel_close(nullptr);  // must be a no-op
  CHECK(std::strcmp(fhasel_last_error(nullptr), "") == 0);
  CHECK(fhasel_set(nullptr, "scenario.seed", "1") == FHASEL_ERR_VALIDATION);
  CHECK(fhasel_run(nullptr, nullptr, nullptr, nullptr) == FHASEL_ERR_VALIDATION);
}

TEST_CASE("set validates keys and keeps the message available") {
  Session ses;
  CHECK(fhasel_set(ses.s, "scenario.freq_hz", "2.0") == FHASEL_OK);
  CHECK(fhasel_set(ses.s, "scenario.bogus_key", "1") == FHASEL_ERR_VALIDATION);
  const std::string msg = fhasel_last_error(ses.s);
  CHECK(msg.find("bogus_key") != std::string::npos);
  // a successful call clears the sticky message
  CHECK(fhasel_set(ses.s, "scenario.seed", "9") == FHASEL_OK);
  CHECK(std::strcmp(fhasel_last_error(ses.s), "") == 0);
}

TEST_CASE("config files load through the API") {
  const auto good = temp_config(
      "[scenario]\n"
      "freq_hz = 2.0\n"
      "duration_s = 5.5\n");
  fhasel_session* s = nullptr;
  REQUIRE(fhasel_open_config(good.string().c_str(), &s) == FHASEL_OK);
  fhasel_close(s);

  int sentinel = 0;
  s = reinterpret_cast<fhasel_session*>(&sentinel);  // must come back null on failure
  CHECK(fhasel_open_config("/does/not/exist.ini", &s) == FHASEL_ERR_VALIDATION);
  CHECK(s == nullptr);

  const auto bad = temp_config("[scenario]\nfreq_hz = not_a_number\n");
  CHECK(fhasel_open_config(bad.string().c_str(), &s) == FHASEL_ERR_VALIDATION);
  CHECK(s == nullptr);
}

TEST_CASE("a full run reports its metrics and CSV through the handle") {
  Session ses;
  REQUIRE(fhasel_set(ses.s, "scenario.freq_hz", "2.0") == FHASEL_OK);
  REQUIRE(fhasel_set(ses.s, "scenario.duration_s", "5.5") == FHASEL_OK);
  double nrmse = -1.0, phase = 1e9;
  REQUIRE(fhasel_run(ses.s, nullptr, &nrmse, &phase) == FHASEL_OK);
  CHECK(nrmse >= 0.0);
  CHECK(nrmse < 0.05);
  CHECK(std::fabs(phase) < 4.0);
  const std::string report = fhasel_last_report(ses.s);
  CHECK(report.find("scenario,method,mapping,freq_hz,nrmse,phase_deg,seed") == 0);
  CHECK(report.find("default,voltage,single,2,") != std::string::npos);
}

TEST_CASE("invalid scenarios fail with the validation status") {
  Session ses;
  REQUIRE(fhasel_set(ses.s, "scenario.amplitude_kv", "3.0") == FHASEL_OK);
  REQUIRE(fhasel_set(ses.s, "scenario.offset_kv", "4.0") == FHASEL_OK);  // 7 kV peak
  CHECK(fhasel_run(ses.s, nullptr, nullptr, nullptr) == FHASEL_ERR_VALIDATION);
  const std::string msg = fhasel_last_error(ses.s);
  CHECK(msg.find("6 kV") != std::string::npos);
}

TEST_CASE("calibration writes a loadable map file") {
  namespace fs = std::filesystem;
  Session ses;
  REQUIRE(fhasel_set(ses.s, "scenario.freq_hz", "2.0") == FHASEL_OK);
  REQUIRE(fhasel_set(ses.s, "scenario.duration_s", "5.5") == FHASEL_OK);
  const fs::path map = fs::temp_directory_path() / "fhasel_capi" / "map.csv";
  fs::create_directories(map.parent_path());
  REQUIRE(fhasel_calibrate(ses.s, map.string().c_str()) == FHASEL_OK);
  CHECK(fs::exists(map));
  std::ifstream in(map);
  std::string first;
  std::getline(in, first);
  CHECK(first.find("kind,") == 0);
  fs::remove_all(map.parent_path());
}

TEST_CASE("pure helpers compute and guard their formulas") {
  double f_c = 0.0;
  REQUIRE(fhasel_cutoff_frequency(2e6, 1e5, 100e-12, &f_c) == FHASEL_OK);
  CHECK(f_c == doctest::Approx(757.8806813899778).epsilon(1e-12));
  CHECK(fhasel_cutoff_frequency(2e6, 1e5, 100e-12, nullptr) == FHASEL_ERR_VALIDATION);
  CHECK(fhasel_cutoff_frequency(0.0, 0.0, 1e-10, &f_c) == FHASEL_ERR_RUNTIME);

  double z = 0.0;
  REQUIRE(fhasel_impedance_magnitude(2.0, 1.0, 1e6, 1e-6, &z) == FHASEL_OK);
  CHECK(z == doctest::Approx(2e6).epsilon(1e-12));
  CHECK(fhasel_impedance_magnitude(2.0, 1e-9, 1e6, 1e-6, &z) == FHASEL_ERR_RUNTIME);

  // round trip through both helpers at the sensing frequency
  const double r_e = 1e5, f = 2e3, c_true = 321e-12;
  const double reactance = 1.0 / (2.0 * M_PI * f * c_true);
  const double z_true = std::hypot(r_e, reactance);
  double c = 0.0;
  REQUIRE(fhasel_capacitance_from_impedance(z_true, r_e, f, &c) == FHASEL_OK);
  CHECK(c == doctest::Approx(c_true).epsilon(1e-12));
  CHECK(fhasel_capacitance_from_impedance(r_e, r_e, f, &c) == FHASEL_ERR_RUNTIME);
}
