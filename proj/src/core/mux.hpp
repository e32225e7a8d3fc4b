#pragma once

#include <cstdint>
#include <vector>

#include "calibration.hpp"
#include "trace.hpp"

namespace fhasel {

// Round-robin time-division plan over the shared sensing circuit, aligned to
// RMS window boundaries. Each channel owns slot_windows consecutive windows;
// the first settle_windows of a slot are discarded while the switch settles.
struct MuxPlan {
  int n_channels = 1;
  int slot_windows = 1;
  int settle_windows = 0;
  std::vector<int> order;  // optional permutation of 0..n-1; empty = identity

  void validate() const;
  int cycle_windows() const { return n_channels * slot_windows; }
};

struct ChannelSlot {
  int channel = 0;
  bool settling = false;
};

// Which channel owns a given window, and whether it is still settling.
ChannelSlot schedule(const MuxPlan& plan, std::int64_t window_index);

struct ChannelEstimate {
  int channel = 0;
  double t = 0.0;            // s, time of the window this estimate came from
  double displacement = 0.0; // m (or the map's target unit)
  double feature = 0.0;
  bool stale = false;        // estimate older than one full cycle
};

// Per-channel calibration handed to the mux runner.
struct MuxChannelMap {
  bool dual = false;
  PolyMap3 single;
  DualPolyMap3 dual_map;
};

struct MuxOutput {
  // One row per (window, channel) once the channel has produced an estimate;
  // held rows repeat the last estimate and its timestamp (zero-order hold).
  std::vector<ChannelEstimate> rows;
  // Times of fresh (non-held) estimates per channel.
  std::vector<std::vector<double>> fresh_times;
};

// Steps the plan across per-channel feature streams. All streams must share
// rate, start time and length; only windows scheduled (and settled) for a
// channel update that channel's estimate.
MuxOutput step_mux(const MuxPlan& plan, const std::vector<FeatureStream>& features,
                   const std::vector<MuxChannelMap>& maps, ClampRange clamp);

void write_mux_csv(const std::string& path, const std::vector<ChannelEstimate>& rows);

}  // namespace fhasel
