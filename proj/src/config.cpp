#include "evline/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "evline/scarf.hpp"

namespace evline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + value + "'");
}

}  // namespace

PipelineConfig PipelineConfig::for_sensor(SensorGeometry sensor) {
  PipelineConfig c;
  c.sensor = sensor;
  struct Preset {
    int width;
    int b;
    double dq;
  };
  constexpr Preset presets[] = {{240, 8, 0.8}, {346, 10, 1.1}, {640, 14, 2.5}};
  const Preset* best = &presets[0];
  for (const auto& p : presets) {
    if (std::abs(p.width - sensor.width) < std::abs(best->width - sensor.width)) best = &p;
  }
  c.block_size = best->b;
  c.delta_q = best->dq;
  return c;
}

std::size_t PipelineConfig::buffer_capacity() const {
  return evline::buffer_capacity(alpha, block_size);
}

LineParams PipelineConfig::line_params() const {
  LineParams p = LineParams::defaults(block_size, buffer_capacity(), delta_q);
  p.f_th = f_th;
  if (d_max) p.d_max = *d_max;
  if (suppress_radius) p.suppress_radius = *suppress_radius;
  if (corner_radius) p.corner_radius = *corner_radius;
  if (min_events) p.min_events = *min_events;
  return p;
}

void PipelineConfig::validate() const {
  if (sensor.width <= 0 || sensor.height <= 0) throw ConfigError("sensor must be positive");
  if (block_size < 2 || block_size % 2 != 0) throw ConfigError("block_size must be even and >= 2");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(f_th >= 0.0 && f_th <= 1.0)) throw ConfigError("f_th must be in [0, 1]");
  if (!(delta_q > 0.0)) throw ConfigError("delta_q must be positive");
  if (d_max && !(*d_max > 0.0)) throw ConfigError("d_max must be positive");
  if (suppress_radius && *suppress_radius < 0.0) throw ConfigError("suppress_radius must be >= 0");
  if (corner_radius && *corner_radius < 0.0) throw ConfigError("corner_radius must be >= 0");
  if (events_per_step < 1) throw ConfigError("events_per_step must be >= 1");
  if (window_end_us < window_start_us) throw ConfigError("window_end_us precedes window_start_us");
  if (loop_threads < 1 || loop_threads > 2) throw ConfigError("loop_threads must be 1 or 2");
}

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    entries[key] = value;
  }
  return entries;
}

ConfigEntries load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

PipelineConfig make_config(const ConfigEntries& entries,
                           std::optional<SensorGeometry> fallback_sensor) {
  SensorGeometry sensor = fallback_sensor.value_or(SensorGeometry{240, 180});
  if (auto it = entries.find("width"); it != entries.end()) {
    sensor.width = static_cast<int>(to_int(it->first, it->second));
  }
  if (auto it = entries.find("height"); it != entries.end()) {
    sensor.height = static_cast<int>(to_int(it->first, it->second));
  }
  if (sensor.width <= 0 || sensor.height <= 0) throw ConfigError("sensor must be positive");
  PipelineConfig c = PipelineConfig::for_sensor(sensor);

  for (const auto& [key, value] : entries) {
    if (key == "width" || key == "height") continue;
    if (key == "block_size" || key == "b") {
      c.block_size = static_cast<int>(to_int(key, value));
    } else if (key == "alpha") {
      c.alpha = to_double(key, value);
    } else if (key == "f_th") {
      c.f_th = to_double(key, value);
    } else if (key == "delta_q") {
      c.delta_q = to_double(key, value);
    } else if (key == "d_max") {
      c.d_max = to_double(key, value);
    } else if (key == "suppress_radius") {
      c.suppress_radius = to_double(key, value);
    } else if (key == "corner_radius") {
      c.corner_radius = to_double(key, value);
    } else if (key == "min_events") {
      const auto n = to_int(key, value);
      if (n < 1) throw ConfigError("min_events must be >= 1");
      c.min_events = static_cast<std::size_t>(n);
    } else if (key == "mode") {
      if (value == "threaded") c.mode = RunMode::threaded;
      else if (value == "lockstep") c.mode = RunMode::lockstep;
      else throw ConfigError("mode must be threaded or lockstep");
    } else if (key == "playback") {
      if (value == "asap" || value == "as-fast-as-possible") c.playback = Playback::as_fast_as_possible;
      else if (value == "paced" || value == "wall-clock") c.playback = Playback::wall_clock;
      else throw ConfigError("playback must be asap or paced");
    } else if (key == "events_per_step") {
      const auto n = to_int(key, value);
      if (n < 1) throw ConfigError("events_per_step must be >= 1");
      c.events_per_step = static_cast<std::size_t>(n);
    } else if (key == "window_start_us") {
      c.window_start_us = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "window_end_us") {
      c.window_end_us = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "loop_threads") {
      c.loop_threads = static_cast<int>(to_int(key, value));
    } else if (key == "check_invariants") {
      c.check_invariants = to_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

void apply_environment(PipelineConfig& config) {
  if (const char* env = std::getenv("EVLINE_THREADS"); env && *env) {
    config.loop_threads = static_cast<int>(to_int("EVLINE_THREADS", env));
    config.validate();
  }
}

std::string describe(const PipelineConfig& c) {
  const auto p = c.line_params();
  std::ostringstream os;
  os << "sensor=" << c.sensor.width << "x" << c.sensor.height << " b=" << c.block_size
     << " alpha=" << c.alpha << " N=" << c.buffer_capacity() << " f_th=" << p.f_th
     << " delta_q=" << p.delta_q << " d_max=" << p.d_max << " suppress_radius=" << p.suppress_radius
     << " corner_radius=" << p.corner_radius << " min_events=" << p.min_events
     << " mode=" << (c.mode == RunMode::threaded ? "threaded" : "lockstep");
  return os.str();
}

}  // namespace evline
