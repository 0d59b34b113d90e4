#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "evline/events.hpp"
#include "evline/line_state.hpp"

namespace evline {

enum class RunMode { threaded, lockstep };
enum class Playback { as_fast_as_possible, wall_clock };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  SensorGeometry sensor{240, 180};
  int block_size = 8;
  double alpha = 1.0;
  double f_th = 0.2;
  double delta_q = 0.8;
  // Derived from the block size / delta_q unless set.
  std::optional<double> d_max;
  std::optional<double> suppress_radius;
  std::optional<double> corner_radius;
  std::optional<std::size_t> min_events;

  RunMode mode = RunMode::threaded;
  Playback playback = Playback::as_fast_as_possible;
  std::size_t events_per_step = 64;  // lockstep only
  // Steady-state measurement window in stream time.
  std::uint64_t window_start_us = 5'000'000;
  std::uint64_t window_end_us = 10'000'000;
  // Process-driven loop threads in threaded mode: 2 runs detection and tracking on
  // their own threads, 1 alternates both on one thread.
  int loop_threads = 2;
  bool check_invariants = true;

  // Resolution defaults: 240x180 -> b=8, dq=0.8; 346x260 -> b=10, dq=1.1;
  // 640x480 -> b=14, dq=2.5. Other sensors take the closest of the three by width.
  static PipelineConfig for_sensor(SensorGeometry sensor);

  LineParams line_params() const;
  std::size_t buffer_capacity() const;
  void validate() const;
};

using ConfigEntries = std::map<std::string, std::string>;

// key=value lines; '#' starts a comment.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries load_config_file(const std::filesystem::path& path);

// Sensor keys pick the resolution defaults, then every other key overrides.
PipelineConfig make_config(const ConfigEntries& entries,
                           std::optional<SensorGeometry> fallback_sensor = std::nullopt);

// Applies EVLINE_THREADS when set.
void apply_environment(PipelineConfig& config);

std::string describe(const PipelineConfig& config);

}  // namespace evline
