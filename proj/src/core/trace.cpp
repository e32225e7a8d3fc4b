#include "trace.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "errors.hpp"

namespace fhasel {

void SignalTrace::validate(const char* what) const {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw model_error(std::string(what) + ": sample rate must be positive and finite");
  }
  if (!std::isfinite(t0)) {
    throw model_error(std::string(what) + ": start time must be finite");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw model_error(std::string(what) + ": non-finite sample");
    }
  }
}

const char* to_string(FeatureKind k) {
  return k == FeatureKind::voltage ? "voltage" : "impedance";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "voltage") return FeatureKind::voltage;
  if (s == "impedance") return FeatureKind::impedance;
  throw model_error("unknown feature kind: " + s);
}

std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_sig12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw model_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw model_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw model_error("rename failed for " + target.string() + ": " + ec.message());
}

void write_trace_csv(const std::string& path, const SignalTrace& trace) {
  std::string out;
  out.reserve(trace.samples.size() * 24 + 16);
  out += "t_s,value_v\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out += format_sig9(trace.time_at(i));
    out += ',';
    out += format_sig9(trace.samples[i]);
    out += '\n';
  }
  atomic_write_text(path, out);
}

void write_feature_csv(const std::string& path, const FeatureStream& stream) {
  std::string out;
  out.reserve(stream.values.size() * 32 + 16);
  out += "t_s,value,kind\n";
  const char* kind = to_string(stream.kind);
  for (std::size_t i = 0; i < stream.values.size(); ++i) {
    out += format_sig9(stream.time_at(i));
    out += ',';
    out += format_sig9(stream.values[i]);
    out += ',';
    out += kind;
    out += '\n';
  }
  atomic_write_text(path, out);
}

}  // namespace fhasel
