#include "mux.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace fhasel {

void MuxPlan::validate() const {
  if (n_channels < 1) throw validation_error("mux: n_channels must be >= 1");
  if (slot_windows < 1) throw validation_error("mux: slot_windows must be >= 1");
  if (settle_windows < 0) throw validation_error("mux: settle_windows must be >= 0");
  if (settle_windows >= slot_windows) {
    throw validation_error("mux: settle_windows must be < slot_windows");
  }
  if (!order.empty()) {
    if (static_cast<int>(order.size()) != n_channels) {
      throw validation_error("mux: order must list every channel exactly once");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n_channels), false);
    for (int ch : order) {
      if (ch < 0 || ch >= n_channels || seen[static_cast<std::size_t>(ch)]) {
        throw validation_error("mux: order must be a permutation of 0..n-1");
      }
      seen[static_cast<std::size_t>(ch)] = true;
    }
  }
}

ChannelSlot schedule(const MuxPlan& plan, std::int64_t window_index) {
  plan.validate();
  if (window_index < 0) throw model_error("schedule: window_index must be >= 0");
  const int cycle = plan.cycle_windows();
  const int pos = static_cast<int>(window_index % cycle);
  const int slot = pos / plan.slot_windows;
  const int within = pos % plan.slot_windows;
  ChannelSlot out;
  out.channel = plan.order.empty() ? slot : plan.order[static_cast<std::size_t>(slot)];
  out.settling = within < plan.settle_windows;
  return out;
}

MuxOutput step_mux(const MuxPlan& plan, const std::vector<FeatureStream>& features,
                   const std::vector<MuxChannelMap>& maps, ClampRange clamp) {
  plan.validate();
  const std::size_t n = static_cast<std::size_t>(plan.n_channels);
  if (features.size() != n || maps.size() != n) {
    throw model_error("step_mux: need one feature stream and one map per channel");
  }
  for (std::size_t ch = 1; ch < n; ++ch) {
    if (features[ch].values.size() != features[0].values.size() ||
        features[ch].rate != features[0].rate || features[ch].t0 != features[0].t0) {
      throw model_error("step_mux: channel streams must share rate, start and length");
    }
  }
  if (!(features[0].rate > 0.0)) throw model_error("step_mux: feature rate must be > 0");

  const double cycle_s = static_cast<double>(plan.cycle_windows()) / features[0].rate;

  struct ChannelState {
    PhaseTracker tracker;
    bool has_estimate = false;
    ChannelEstimate last{};
  };
  std::vector<ChannelState> state;
  state.reserve(n);
  for (std::size_t ch = 0; ch < n; ++ch) {
    const auto& m = maps[ch];
    const int w = m.dual ? m.dual_map.slope_window : 2;
    const double tol = m.dual ? m.dual_map.slope_tie_tol : 0.0;
    const bool hold = m.dual ? m.dual_map.hold_last_on_tie : true;
    state.push_back({PhaseTracker(w, tol, hold), false, {}});
  }

  MuxOutput out;
  out.fresh_times.resize(n);
  const std::size_t n_windows = features[0].values.size();
  out.rows.reserve(n_windows * n);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const double t_now = features[0].time_at(w);
    const ChannelSlot slot = schedule(plan, static_cast<std::int64_t>(w));
    if (!slot.settling) {
      auto& st = state[static_cast<std::size_t>(slot.channel)];
      const auto& m = maps[static_cast<std::size_t>(slot.channel)];
      const double feature = features[static_cast<std::size_t>(slot.channel)].values[w];
      double est = m.dual ? estimate_displacement(m.dual_map, feature, st.tracker, clamp)
                          : estimate_displacement(m.single, feature, clamp);
      st.last = {slot.channel, t_now, est, feature, false};
      st.has_estimate = true;
      out.fresh_times[static_cast<std::size_t>(slot.channel)].push_back(t_now);
    }
    for (std::size_t ch = 0; ch < n; ++ch) {
      auto& st = state[ch];
      if (!st.has_estimate) continue;  // nothing to hold yet
      ChannelEstimate row = st.last;
      row.stale = (t_now - row.t) > cycle_s * (1.0 + 1e-9);
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_mux_csv(const std::string& path, const std::vector<ChannelEstimate>& rows) {
  std::string out;
  out.reserve(rows.size() * 32 + 32);
  out += "t_s,channel,displacement_m,stale\n";
  for (const auto& r : rows) {
    out += format_sig9(r.t);
    out += ',';
    out += std::to_string(r.channel);
    out += ',';
    out += format_sig9(r.displacement);
    out += ',';
    out += r.stale ? '1' : '0';
    out += '\n';
  }
  atomic_write_text(path, out);
}

}  // namespace fhasel
