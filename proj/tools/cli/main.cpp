#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "fhasel/fhasel.h"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::string seed;
  std::string method;
  std::string mapping;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_out) {
  cmd->add_option("config", o.config, "config file (sectioned key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  if (with_out) cmd->add_option("--out", o.out, "output directory for CSV files");
  cmd->add_option("--seed", o.seed, "override scenario.seed");
  cmd->add_option("--method", o.method, "voltage | impedance")
      ->check(CLI::IsMember({"voltage", "impedance"}));
  cmd->add_option("--mapping", o.mapping, "single | dual")
      ->check(CLI::IsMember({"single", "dual"}));
}

// Opens the session and applies the common overrides. Returns nullptr after
// printing the error; *code carries the exit code.
fhasel_session* open_session(const CommonOpts& o, int* code) {
  fhasel_session* s = nullptr;
  fhasel_status st = fhasel_open_config(o.config.c_str(), &s);
  if (st != FHASEL_OK) {
    std::fprintf(stderr, "error: %s\n",
                 s ? fhasel_last_error(s) : "cannot open config");
    fhasel_close(s);
    *code = static_cast<int>(st);
    return nullptr;
  }
  auto apply = [&](const char* key, const std::string& value) {
    if (value.empty()) return true;
    if (fhasel_set(s, key, value.c_str()) != FHASEL_OK) {
      std::fprintf(stderr, "error: %s\n", fhasel_last_error(s));
      return false;
    }
    return true;
  };
  if (!apply("scenario.seed", o.seed) || !apply("scenario.method", o.method) ||
      !apply("scenario.mapping", o.mapping)) {
    fhasel_close(s);
    *code = static_cast<int>(FHASEL_ERR_VALIDATION);
    return nullptr;
  }
  *code = 0;
  return s;
}

int finish(fhasel_session* s, fhasel_status st, bool print_report) {
  if (st != FHASEL_OK) {
    std::fprintf(stderr, "error: %s\n", fhasel_last_error(s));
  } else if (print_report) {
    std::fputs(fhasel_last_report(s), stdout);
  }
  fhasel_close(s);
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacitive self-sensing simulator for folded-electrode actuators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fhasel_version()));

  CommonOpts sim_o, cal_o, run_o, sweep_o, bench_o, mux_o, joints_o;
  std::string map_out;

  CLI::App* sim = app.add_subcommand("simulate", "write raw traces and features");
  add_common(sim, sim_o, true);

  CLI::App* cal = app.add_subcommand("calibrate", "fit and save a calibration map");
  add_common(cal, cal_o, false);
  cal->add_option("--out", map_out, "map file path")->required();

  CLI::App* run = app.add_subcommand("run", "calibrate, estimate, score one scenario");
  add_common(run, run_o, true);

  CLI::App* sweep = app.add_subcommand("sweep", "frequency sweep, both methods");
  add_common(sweep, sweep_o, true);

  CLI::App* bench = app.add_subcommand("noise-bench", "noise RMS readings at the reference drive");
  add_common(bench, bench_o, true);

  CLI::App* mux = app.add_subcommand("mux-demo", "multiplexed multi-actuator run");
  add_common(mux, mux_o, true);

  CLI::App* joints = app.add_subcommand("joints", "four-joint tracking session");
  add_common(joints, joints_o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // bad usage is a validation failure
  }

  int code = 0;
  if (sim->parsed()) {
    fhasel_session* s = open_session(sim_o, &code);
    if (!s) return code;
    return finish(s, fhasel_simulate(s, sim_o.out.c_str()), false);
  }
  if (cal->parsed()) {
    fhasel_session* s = open_session(cal_o, &code);
    if (!s) return code;
    return finish(s, fhasel_calibrate(s, map_out.c_str()), false);
  }
  if (run->parsed()) {
    fhasel_session* s = open_session(run_o, &code);
    if (!s) return code;
    return finish(s, fhasel_run(s, run_o.out.empty() ? nullptr : run_o.out.c_str(),
                                nullptr, nullptr),
                  true);
  }
  if (sweep->parsed()) {
    fhasel_session* s = open_session(sweep_o, &code);
    if (!s) return code;
    return finish(s, fhasel_sweep(s, sweep_o.out.empty() ? nullptr : sweep_o.out.c_str()),
                  true);
  }
  if (bench->parsed()) {
    fhasel_session* s = open_session(bench_o, &code);
    if (!s) return code;
    return finish(s,
                  fhasel_noise_bench(s, bench_o.out.empty() ? nullptr : bench_o.out.c_str(),
                                     nullptr, nullptr, nullptr, nullptr),
                  true);
  }
  if (mux->parsed()) {
    fhasel_session* s = open_session(mux_o, &code);
    if (!s) return code;
    return finish(s, fhasel_mux_demo(s, mux_o.out.empty() ? nullptr : mux_o.out.c_str()),
                  true);
  }
  fhasel_session* s = open_session(joints_o, &code);
  if (!s) return code;
  return finish(s, fhasel_joints(s, joints_o.out.empty() ? nullptr : joints_o.out.c_str()),
                true);
}
