#include "evline/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace evline {

namespace {

constexpr double kMaxSubstepPx = 0.5;
constexpr double kExtentEps = 1e-9;

void validate(const SceneSpec& spec) {
  if (spec.sensor.width <= 0 || spec.sensor.height <= 0) {
    throw SceneSpecError("sensor dimensions must be positive");
  }
  if (spec.events_per_crossing < 1) throw SceneSpecError("events_per_crossing must be >= 1");
  if (spec.noise_rate < 0.0) throw SceneSpecError("noise_rate must be >= 0");
  if (spec.gt_period_us == 0) throw SceneSpecError("gt_period_us must be > 0");
  for (const auto& seg : spec.segments) {
    if (seg.keyframes.empty()) {
      throw SceneSpecError("segment " + std::to_string(seg.id) + " has no keyframes");
    }
    if (!(seg.contrast > 0.0 && seg.contrast <= 1.0)) {
      throw SceneSpecError("segment " + std::to_string(seg.id) + " contrast must be in (0, 1]");
    }
    for (std::size_t k = 0; k < seg.keyframes.size(); ++k) {
      const auto& kf = seg.keyframes[k];
      if (norm(kf.p1 - kf.p0) <= 0.0) {
        throw SceneSpecError("segment " + std::to_string(seg.id) + " has zero length at t=" +
                             std::to_string(kf.t));
      }
      if (k > 0 && kf.t <= seg.keyframes[k - 1].t) {
        throw SceneSpecError("segment " + std::to_string(seg.id) +
                             " keyframes must have increasing timestamps");
      }
    }
  }
}

struct SegmentState {
  Vec2 p0;
  Vec2 p1;
};

SegmentState lerp_state(const SegmentState& a, const SegmentState& b, double s) {
  return {lerp(a.p0, b.p0, s), lerp(a.p1, b.p1, s)};
}

// Signed distance of c from the infinite line through the state.
double signed_distance(const SegmentState& s, Vec2 c) {
  const Vec2 d = s.p1 - s.p0;
  return cross(d, c - s.p0) / norm(d);
}

// x-range of the quadrilateral spanned by a and b on the horizontal line y.
bool row_span(const SegmentState& a, const SegmentState& b, double y, double& lo, double& hi) {
  const Vec2 pts[4] = {a.p0, a.p1, b.p1, b.p0};
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Vec2 p = pts[i];
      const Vec2 q = pts[j];
      if (p.y == y) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
      }
      if (q.y == y) {
        lo = std::min(lo, q.x);
        hi = std::max(hi, q.x);
      }
      if ((p.y < y && q.y > y) || (p.y > y && q.y < y)) {
        const double x = p.x + (q.x - p.x) * (y - p.y) / (q.y - p.y);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  return lo <= hi;
}

// Fires each crossing with probability `contrast`; rng is null for full contrast.
void emit_crossings(const SegmentState& a, const SegmentState& b, double ta, double tb,
                    const SceneSpec& spec, double contrast, std::mt19937_64* rng,
                    std::vector<Event>& out) {
  const int w = spec.sensor.width;
  const int h = spec.sensor.height;
  const double ymin = std::min({a.p0.y, a.p1.y, b.p0.y, b.p1.y});
  const double ymax = std::max({a.p0.y, a.p1.y, b.p0.y, b.p1.y});
  const int row_lo = std::max(0, static_cast<int>(std::floor(ymin)) - 1);
  const int row_hi = std::min(h - 1, static_cast<int>(std::ceil(ymax)) + 1);

  for (int y = row_lo; y <= row_hi; ++y) {
    double lo = 0, hi = 0;
    // Rows just outside the swept quad still get a look for rotation non-linearity.
    double probe = std::clamp(static_cast<double>(y), ymin, ymax);
    if (!row_span(a, b, probe, lo, hi)) continue;
    const int col_lo = std::max(0, static_cast<int>(std::floor(lo)) - 1);
    const int col_hi = std::min(w - 1, static_cast<int>(std::ceil(hi)) + 1);
    for (int x = col_lo; x <= col_hi; ++x) {
      const Vec2 c{static_cast<double>(x), static_cast<double>(y)};
      const double sa = signed_distance(a, c);
      if (sa == 0.0) continue;
      const double sb = signed_distance(b, c);
      const bool crossed = sb == 0.0 || ((sa < 0.0) != (sb < 0.0));
      if (!crossed) continue;
      const double lambda = sa / (sa - sb);
      const SegmentState at = lerp_state(a, b, lambda);
      const Vec2 d = at.p1 - at.p0;
      const double len = norm(d);
      const double along = dot(c - at.p0, d) / len;
      if (along < -kExtentEps || along > len + kExtentEps) continue;
      if (rng && std::uniform_real_distribution<double>(0.0, 1.0)(*rng) >= contrast) continue;
      Event e;
      e.t = static_cast<std::uint64_t>(std::llround(ta + lambda * (tb - ta)));
      e.u = static_cast<std::uint16_t>(x);
      e.v = static_cast<std::uint16_t>(y);
      e.p = sa < 0.0 ? std::int8_t{1} : std::int8_t{-1};
      for (int k = 0; k < spec.events_per_crossing; ++k) out.push_back(e);
    }
  }
}

void emit_segment_events(const MovingSegment& seg, const SceneSpec& spec,
                         std::vector<Event>& out) {
  const auto& kfs = seg.keyframes;
  const double end = static_cast<double>(spec.duration_us);
  std::mt19937_64 rng(spec.seed * 1'000'003 + seg.id);
  std::mt19937_64* thinning = seg.contrast < 1.0 ? &rng : nullptr;
  for (std::size_t k = 0; k + 1 < kfs.size(); ++k) {
    double ta = static_cast<double>(kfs[k].t);
    double tb = static_cast<double>(kfs[k + 1].t);
    if (ta >= end) break;
    SegmentState a{kfs[k].p0, kfs[k].p1};
    SegmentState b{kfs[k + 1].p0, kfs[k + 1].p1};
    if (tb > end) {
      b = lerp_state(a, b, (end - ta) / (tb - ta));
      tb = end;
    }
    const double move = std::max(norm(b.p0 - a.p0), norm(b.p1 - a.p1));
    const int steps = std::max(1, static_cast<int>(std::ceil(move / kMaxSubstepPx)));
    SegmentState prev = a;
    for (int s = 1; s <= steps; ++s) {
      const double frac = static_cast<double>(s) / steps;
      const SegmentState next = s == steps ? b : lerp_state(a, b, frac);
      const double t0 = ta + (tb - ta) * static_cast<double>(s - 1) / steps;
      const double t1 = s == steps ? tb : ta + (tb - ta) * frac;
      emit_crossings(prev, next, t0, t1, spec, seg.contrast, thinning, out);
      prev = next;
    }
  }
}

// Clips a segment to the pixel-centre rectangle of the sensor.
std::optional<std::pair<Vec2, Vec2>> clip_to_sensor(Vec2 p0, Vec2 p1, const SensorGeometry& s) {
  const Rect r{0.0, 0.0, static_cast<double>(s.width - 1), static_cast<double>(s.height - 1)};
  const auto iv = clip_parametric(p0, p1, r, 0.0, 1.0);
  if (!iv) return std::nullopt;
  return std::make_pair(lerp(p0, p1, iv->t_in), lerp(p0, p1, iv->t_out));
}

double estimated_signal_rate(const SceneSpec& spec) {
  double swept = 0.0;
  for (const auto& seg : spec.segments) {
    for (std::size_t k = 0; k + 1 < seg.keyframes.size(); ++k) {
      const auto& a = seg.keyframes[k];
      const auto& b = seg.keyframes[k + 1];
      const Vec2 d = a.p1 - a.p0;
      const Vec2 n = Vec2{-d.y, d.x} / norm(d);
      const Vec2 mid_move = (b.p0 + b.p1) * 0.5 - (a.p0 + a.p1) * 0.5;
      swept += seg.contrast * norm(d) * std::abs(dot(mid_move, n));
    }
  }
  return swept * spec.events_per_crossing / (static_cast<double>(spec.duration_us) * 1e-6);
}

// Keyframes moving a segment back and forth between its base position and
// base + offset, one leg every `leg_us`.
std::vector<Keyframe> oscillate(Vec2 p0, Vec2 p1, Vec2 offset, std::uint64_t leg_us,
                                std::uint64_t duration_us, std::uint64_t phase_us = 0) {
  std::vector<Keyframe> kfs;
  bool out_leg = true;
  kfs.push_back({0, p0, p1});
  // Initial partial leg so different segments are out of phase.
  std::uint64_t t = 0;
  if (phase_us > 0 && phase_us < leg_us) {
    const double s = static_cast<double>(phase_us) / static_cast<double>(leg_us);
    kfs.back() = {0, p0 + offset * s, p1 + offset * s};
    t = leg_us - phase_us;
    kfs.push_back({t, p0 + offset, p1 + offset});
    out_leg = false;
  }
  while (t < duration_us) {
    t += leg_us;
    const Vec2 off = out_leg ? offset : Vec2{};
    kfs.push_back({t, p0 + off, p1 + off});
    out_leg = !out_leg;
  }
  return kfs;
}

}  // namespace

std::optional<std::pair<Vec2, Vec2>> segment_at(const MovingSegment& seg, double t,
                                                std::uint64_t scene_duration_us) {
  const auto& kfs = seg.keyframes;
  if (kfs.empty() || t > static_cast<double>(scene_duration_us)) return std::nullopt;
  if (kfs.size() == 1) return std::make_pair(kfs[0].p0, kfs[0].p1);
  if (t < static_cast<double>(kfs.front().t) || t > static_cast<double>(kfs.back().t)) {
    return std::nullopt;
  }
  auto it = std::upper_bound(kfs.begin(), kfs.end(), t, [](double v, const Keyframe& k) {
    return v < static_cast<double>(k.t);
  });
  if (it == kfs.end()) return std::make_pair(kfs.back().p0, kfs.back().p1);
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double s = (t - static_cast<double>(a.t)) / static_cast<double>(b.t - a.t);
  return std::make_pair(lerp(a.p0, b.p0, s), lerp(a.p1, b.p1, s));
}

Scene generate_scene(const SceneSpec& spec) {
  validate(spec);
  Scene scene;

  for (const auto& seg : spec.segments) emit_segment_events(seg, spec, scene.events);

  const auto noise_count = static_cast<std::size_t>(
      std::llround(spec.noise_rate * static_cast<double>(spec.duration_us) * 1e-6));
  if (noise_count > 0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::uint64_t> t_dist(0, spec.duration_us - 1);
    std::uniform_int_distribution<int> u_dist(0, spec.sensor.width - 1);
    std::uniform_int_distribution<int> v_dist(0, spec.sensor.height - 1);
    std::bernoulli_distribution p_dist(0.5);
    scene.events.reserve(scene.events.size() + noise_count);
    for (std::size_t i = 0; i < noise_count; ++i) {
      Event e;
      e.t = t_dist(rng);
      e.u = static_cast<std::uint16_t>(u_dist(rng));
      e.v = static_cast<std::uint16_t>(v_dist(rng));
      e.p = p_dist(rng) ? std::int8_t{1} : std::int8_t{-1};
      scene.events.push_back(e);
    }
  }
  std::stable_sort(scene.events.begin(), scene.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });

  if (!spec.segments.empty()) {
    for (std::uint64_t t = 0; t <= spec.duration_us; t += spec.gt_period_us) {
      for (const auto& seg : spec.segments) {
        const auto pos = segment_at(seg, static_cast<double>(t), spec.duration_us);
        if (!pos) continue;
        const auto clipped = clip_to_sensor(pos->first, pos->second, spec.sensor);
        if (!clipped) continue;
        scene.ground_truth.push_back({t, seg.id, clipped->first.x, clipped->first.y,
                                      clipped->second.x, clipped->second.y});
      }
    }
  }
  return scene;
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SceneSpecError(std::string("invalid scene JSON: ") + e.what());
  }
  SceneSpec spec;
  try {
    spec.sensor = SensorGeometry(j.value("width", 240), j.value("height", 180));
    spec.duration_us = j.value("duration_us", spec.duration_us);
    spec.events_per_crossing = j.value("events_per_crossing", spec.events_per_crossing);
    spec.noise_rate = j.value("noise_rate", spec.noise_rate);
    spec.gt_period_us = j.value("gt_period_us", spec.gt_period_us);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("segments")) {
      std::uint32_t next_id = 1;
      for (const auto& js : j.at("segments")) {
        MovingSegment seg;
        seg.id = js.value("id", next_id);
        next_id = seg.id + 1;
        seg.contrast = js.value("contrast", seg.contrast);
        for (const auto& jk : js.at("keyframes")) {
          seg.keyframes.push_back({jk.value("t", std::uint64_t{0}),
                                   {jk.at("x0").get<double>(), jk.at("y0").get<double>()},
                                   {jk.at("x1").get<double>(), jk.at("y1").get<double>()}});
        }
        spec.segments.push_back(std::move(seg));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SceneSpecError(std::string("invalid scene spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneSpecError(e.what());
  }
  validate(spec);
  return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneSpecError("cannot open scene spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str());
}

std::string dump_scene_spec(const SceneSpec& spec) {
  nlohmann::json j;
  j["width"] = spec.sensor.width;
  j["height"] = spec.sensor.height;
  j["duration_us"] = spec.duration_us;
  j["events_per_crossing"] = spec.events_per_crossing;
  j["noise_rate"] = spec.noise_rate;
  j["gt_period_us"] = spec.gt_period_us;
  j["seed"] = spec.seed;
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : spec.segments) {
    nlohmann::json js;
    js["id"] = seg.id;
    if (seg.contrast < 1.0) js["contrast"] = seg.contrast;
    js["keyframes"] = nlohmann::json::array();
    for (const auto& kf : seg.keyframes) {
      js["keyframes"].push_back(
          {{"t", kf.t}, {"x0", kf.p0.x}, {"y0", kf.p0.y}, {"x1", kf.p1.x}, {"y1", kf.p1.y}});
    }
    j["segments"].push_back(std::move(js));
  }
  return j.dump(2);
}

namespace scenes {

SceneSpec translating_line(std::uint64_t duration_us, double speed_px_s, double noise_fraction,
                           int events_per_crossing, std::uint64_t seed) {
  SceneSpec spec;
  spec.sensor = SensorGeometry(240, 180);
  spec.duration_us = duration_us;
  spec.events_per_crossing = events_per_crossing;
  spec.seed = seed;
  // Sweeps between x=20 and x=220 and back so the line stays in view.
  const double x_lo = 20.0;
  const double span = 200.0;
  const auto leg_us = static_cast<std::uint64_t>(std::llround(span / speed_px_s * 1e6));
  MovingSegment line;
  line.id = 1;
  line.keyframes = oscillate({x_lo, 0.0}, {x_lo, 179.0}, {span, 0.0}, leg_us, duration_us);
  spec.segments.push_back(std::move(line));
  spec.noise_rate = noise_fraction * estimated_signal_rate(spec);
  return spec;
}

SceneSpec mixed(std::uint64_t duration_us, double noise_fraction, int events_per_crossing,
                std::uint64_t seed) {
  SceneSpec spec;
  spec.sensor = SensorGeometry(240, 180);
  spec.duration_us = duration_us;
  spec.events_per_crossing = events_per_crossing;
  spec.seed = seed;
  std::uint32_t id = 1;
  auto add = [&](Vec2 p0, Vec2 p1, Vec2 offset, double speed, std::uint64_t phase_us,
                 double contrast = 1.0) {
    const auto leg_us = static_cast<std::uint64_t>(std::llround(norm(offset) / speed * 1e6));
    spec.segments.push_back(
        {id++, oscillate(p0, p1, offset, leg_us, duration_us, phase_us), contrast});
  };
  add({30, 20}, {30, 160}, {60, 0}, 40.0, 0);           // slow vertical
  add({110, 10}, {230, 10}, {0, 50}, 25.0, 300'000);    // slow horizontal
  add({100, 100}, {150, 170}, {50, -20}, 60.0, 0);      // diagonal
  add({60, 40}, {95, 95}, {0, 30}, 35.0, 0, 0.3);        // weak, low-contrast edge
  // Polygonal circle, a curved edge the per-block fit approximates piecewise.
  const Vec2 centre{175, 115};
  const double radius = 35.0;
  constexpr int kSides = 20;
  for (int i = 0; i < kSides; ++i) {
    const double a0 = 2.0 * std::numbers::pi * i / kSides;
    const double a1 = 2.0 * std::numbers::pi * (i + 1) / kSides;
    add(centre + Vec2{std::cos(a0), std::sin(a0)} * radius,
        centre + Vec2{std::cos(a1), std::sin(a1)} * radius, {-30, 10}, 30.0, 0);
  }
  spec.noise_rate = noise_fraction * estimated_signal_rate(spec);
  return spec;
}

SceneSpec throughput(std::uint64_t duration_us, double target_rate_ev_s, std::uint64_t seed) {
  SceneSpec spec;
  spec.sensor = SensorGeometry(240, 180);
  spec.duration_us = duration_us;
  spec.events_per_crossing = 4;
  spec.seed = seed;

  struct Base {
    Vec2 p0, p1, dir;
  };
  std::vector<Base> bases;
  for (int i = 0; i < 8; ++i) {
    const double x = 10.0 + 28.0 * i;
    bases.push_back({{x, 0}, {x, 179}, {1, 0}});
  }
  for (int i = 0; i < 6; ++i) {
    const double y = 8.0 + 28.0 * i;
    bases.push_back({{0, y}, {239, y}, {0, 1}});
  }
  for (int i = 0; i < 4; ++i) {
    const double x = 20.0 + 55.0 * i;
    bases.push_back({{x, 20}, {x + 100, 160}, {0.8, -0.6}});
  }
  double length_sum = 0.0;
  for (const auto& b : bases) {
    const Vec2 d = b.p1 - b.p0;
    length_sum += norm(d) * std::abs(cross(d / norm(d), b.dir));
  }
  const double speed = target_rate_ev_s / (length_sum * spec.events_per_crossing);
  const double amplitude = 20.0;
  const auto leg_us = static_cast<std::uint64_t>(std::llround(amplitude / speed * 1e6));
  std::uint32_t id = 1;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto& b = bases[i];
    const auto phase = static_cast<std::uint64_t>(leg_us * (i % 4) / 4);
    spec.segments.push_back(
        {id++, oscillate(b.p0, b.p1, b.dir * amplitude, leg_us, duration_us, phase)});
  }
  spec.noise_rate = 0.01 * target_rate_ev_s;
  return spec;
}

}  // namespace scenes

}  // namespace evline
