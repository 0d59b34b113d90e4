#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evline/config.hpp"
#include "evline/events.hpp"
#include "evline/trace.hpp"

namespace evline {

struct PipelineMetrics {
  double scarf_event_rate = 0;  // events per wall-clock second
  double detection_freq = 0;    // passes per wall-clock second
  double tracking_freq = 0;
  std::uint64_t events_in_window = 0;
  std::uint64_t detection_passes_in_window = 0;
  std::uint64_t tracking_passes_in_window = 0;
  double window_wall_s = 0;
  // True when the stream never reached window_start_us and the whole run was used.
  bool window_fallback = false;

  std::uint64_t events_ingested = 0;
  std::uint64_t events_rejected = 0;
  std::uint64_t detection_passes = 0;
  std::uint64_t tracking_passes = 0;
  double wall_s = 0;
  std::uint64_t run_end_us = 0;

  std::vector<std::pair<std::uint64_t, std::size_t>> live_segment_count;  // (t_us, live)
  std::vector<double> lifetimes_s;

  std::uint64_t transitions = 0;
  std::uint64_t illegal_transitions = 0;
  std::uint64_t admin_checks = 0;
  std::uint64_t admin_violations = 0;
};

struct RunResult {
  std::vector<TraceRow> trace;
  PipelineMetrics metrics;
};

// Ingestion, detection and tracking on their own threads (or detection and
// tracking alternating on one thread when loop_threads == 1). Passes run
// back-to-back until the stream is consumed and each loop has completed a pass
// over the final state.
RunResult run_threaded(std::span<const Event> events, const PipelineConfig& config);

// Single-threaded: ingest events_per_step events, one detection pass, one
// tracking pass, repeated. Identical inputs give identical traces.
RunResult run_lockstep(std::span<const Event> events, const PipelineConfig& config);

RunResult run_pipeline(std::span<const Event> events, const PipelineConfig& config);

}  // namespace evline
