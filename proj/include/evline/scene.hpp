#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evline/events.hpp"
#include "evline/geometry.hpp"

namespace evline {

// Endpoint pair of a moving segment at a keyframe time.
struct Keyframe {
  std::uint64_t t = 0;
  Vec2 p0;
  Vec2 p1;
};

// Endpoints move linearly between keyframes. The segment exists from the first to
// the last keyframe; a single keyframe means a static segment for the whole scene.
// contrast < 1 models a weak edge: each pixel crossing fires with that probability.
struct MovingSegment {
  std::uint32_t id = 0;
  std::vector<Keyframe> keyframes;
  double contrast = 1.0;
};

struct SceneSpec {
  SensorGeometry sensor{240, 180};
  std::uint64_t duration_us = 1'000'000;
  std::vector<MovingSegment> segments;
  int events_per_crossing = 1;
  double noise_rate = 0.0;  // background events per second over the whole sensor
  std::uint64_t gt_period_us = 1000;
  std::uint64_t seed = 1;
};

struct Scene {
  std::vector<Event> events;
  std::vector<GroundTruthSegment> ground_truth;
};

class SceneSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ideal contrast camera: a pixel fires when the moving edge passes over its centre
// (integer coordinates). One crossing yields `events_per_crossing` identical events
// whose polarity encodes the side the edge came from.
Scene generate_scene(const SceneSpec& spec);

// Endpoints of `seg` at time t, or nullopt outside its lifetime.
std::optional<std::pair<Vec2, Vec2>> segment_at(const MovingSegment& seg, double t,
                                                std::uint64_t scene_duration_us);

SceneSpec load_scene_spec(const std::filesystem::path& path);
SceneSpec parse_scene_spec(const std::string& json_text);
std::string dump_scene_spec(const SceneSpec& spec);

// Canned scenes shared by the acceptance suite, benchmarks and `evline gen`.
namespace scenes {

// One vertical full-height line translating horizontally at `speed_px_s`.
SceneSpec translating_line(std::uint64_t duration_us, double speed_px_s, double noise_fraction,
                           int events_per_crossing, std::uint64_t seed);

// Several lines (one of them low-contrast) and a polygonal circle moving at
// different speeds; used for the threshold and block-size sensitivity runs.
SceneSpec mixed(std::uint64_t duration_us, double noise_fraction, int events_per_crossing,
                std::uint64_t seed);

// High-rate stream of oscillating lines for throughput measurements. Speeds are
// scaled so the expected signal rate is close to `target_rate_ev_s`.
SceneSpec throughput(std::uint64_t duration_us, double target_rate_ev_s, std::uint64_t seed);

}  // namespace scenes

}  // namespace evline
