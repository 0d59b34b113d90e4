#include "evline/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace evline {

namespace {

constexpr double kFar = 1e20;

int clamp_round(double v, int hi) {
  const long r = std::lround(v);
  return static_cast<int>(std::clamp<long>(r, 0, hi));
}

// Lower envelope of parabolas over one row or column.
void edt_1d(const double* f, std::size_t n, double* d, std::vector<int>& v, std::vector<double>& z) {
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q < n; ++q) {
    const double qd = static_cast<double>(q);
    double s = 0;
    while (true) {
      const double vk = v[k];
      s = ((f[q] + qd * qd) - (f[v[k]] + vk * vk)) / (2.0 * qd - 2.0 * vk);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = static_cast<int>(q);
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double diff = static_cast<double>(q) - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

bool is_prediction(const TraceRow& r) {
  return r.l_id != 0 && (r.status == LineStatus::Detected || r.status == LineStatus::GoodTrack);
}

struct CumulativeMasks {
  Mask pred;
  Mask gt;
  std::size_t next_row = 0;
  std::size_t next_gt = 0;
  std::vector<const TraceRow*> rows;
  std::vector<const GroundTruthSegment*> truths;

  CumulativeMasks(std::span<const TraceRow> trace, std::span<const GroundTruthSegment> gt_rows,
                  SensorGeometry sensor)
      : pred(sensor.width, sensor.height), gt(sensor.width, sensor.height) {
    for (const auto& r : trace) {
      if (is_prediction(r)) rows.push_back(&r);
    }
    for (const auto& g : gt_rows) truths.push_back(&g);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TraceRow* a, const TraceRow* b) { return a->t_us < b->t_us; });
    std::stable_sort(truths.begin(), truths.end(),
                     [](const GroundTruthSegment* a, const GroundTruthSegment* b) {
                       return a->t < b->t;
                     });
  }

  void advance_to(std::uint64_t t_us) {
    while (next_row < rows.size() && rows[next_row]->t_us <= t_us) {
      const auto& r = *rows[next_row++];
      draw_segment(pred, {r.x0, r.y0}, {r.x1, r.y1});
    }
    while (next_gt < truths.size() && truths[next_gt]->t <= t_us) {
      const auto& g = *truths[next_gt++];
      draw_segment(gt, {g.x0, g.y0}, {g.x1, g.y1});
    }
  }
};

}  // namespace

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

void draw_segment(Mask& mask, Vec2 a, Vec2 b) {
  if (mask.width <= 0 || mask.height <= 0) return;
  int x0 = clamp_round(a.x, mask.width - 1);
  int y0 = clamp_round(a.y, mask.height - 1);
  const int x1 = clamp_round(b.x, mask.width - 1);
  const int y1 = clamp_round(b.y, mask.height - 1);
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    mask.set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

Mask rasterize(std::span<const std::pair<Vec2, Vec2>> segments, SensorGeometry sensor) {
  Mask mask(sensor.width, sensor.height);
  for (const auto& [a, b] : segments) draw_segment(mask, a, b);
  return mask;
}

std::vector<double> squared_distance_transform(const Mask& mask) {
  const auto w = static_cast<std::size_t>(mask.width);
  const auto h = static_cast<std::size_t>(mask.height);
  std::vector<double> out(w * h, std::numeric_limits<double>::infinity());
  if (mask.empty()) return out;

  std::vector<double> grid(w * h);
  for (std::size_t i = 0; i < w * h; ++i) grid[i] = mask.data[i] ? 0.0 : kFar;

  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(std::max(w, h));
  std::vector<double> d(std::max(w, h));
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) f[y] = grid[y * w + x];
    edt_1d(f.data(), h, d.data(), v, z);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = d[y];
  }
  for (std::size_t y = 0; y < h; ++y) {
    edt_1d(&grid[y * w], w, d.data(), v, z);
    std::copy(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(w), out.begin() + static_cast<std::ptrdiff_t>(y * w));
  }
  return out;
}

double tolerance_px(SensorGeometry sensor, double tolerance_fraction) {
  return std::round(tolerance_fraction * sensor.diagonal() * 100.0) / 100.0;
}

double harmonic_mean(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

PRPoint pr_at(const Mask& pred, const Mask& gt, double tau_px, double t_s) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw std::invalid_argument("pr_at: mask shapes differ");
  }
  const double tau = std::round(tau_px * 100.0) / 100.0;
  const double tau2 = tau * tau;

  auto matched_fraction = [tau2](const Mask& from, const Mask& to) {
    const std::size_t on = from.count();
    if (on == 0) return 1.0;
    const auto dist = squared_distance_transform(to);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < from.data.size(); ++i) {
      if (from.data[i] && dist[i] <= tau2) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(on);
  };

  PRPoint p;
  p.t = t_s;
  p.precision = matched_fraction(pred, gt);
  p.recall = matched_fraction(gt, pred);
  p.f_score = harmonic_mean(p.precision, p.recall);
  return p;
}

std::vector<PRPoint> pr_series(std::span<const TraceRow> trace,
                               std::span<const GroundTruthSegment> gt, SensorGeometry sensor,
                               const HeatMapParams& params, std::optional<std::uint64_t> end_us) {
  std::uint64_t last = 0;
  for (const auto& r : trace) last = std::max(last, r.t_us);
  for (const auto& g : gt) last = std::max(last, g.t);
  if (end_us) last = *end_us;
  if (trace.empty() && gt.empty() && !end_us) return {};

  const std::uint64_t seconds = (last + 999'999) / 1'000'000;
  const double tau = tolerance_px(sensor, params.tolerance_fraction);
  CumulativeMasks masks(trace, gt, sensor);
  std::vector<PRPoint> out;
  out.reserve(seconds);
  for (std::uint64_t s = 1; s <= seconds; ++s) {
    masks.advance_to(s * 1'000'000);
    out.push_back(pr_at(masks.pred, masks.gt, tau, static_cast<double>(s)));
  }
  return out;
}

GrayImage heat_map_frame(std::span<const TraceRow> trace, std::span<const GroundTruthSegment> gt,
                         SensorGeometry sensor, std::uint64_t t_us) {
  CumulativeMasks masks(trace, gt, sensor);
  masks.advance_to(t_us);
  GrayImage img{sensor.width, sensor.height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(sensor.width) * sensor.height, 0)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (masks.pred.data[i]) img.pixels[i] = 255;
    else if (masks.gt.data[i]) img.pixels[i] = 96;
  }
  return img;
}

void write_pr_csv(std::span<const PRPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t_s,precision,recall,f_score\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f\n", p.t, p.precision, p.recall, p.f_score);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

std::vector<double> segment_lifetimes(std::span<const TraceRow> trace,
                                      std::optional<std::uint64_t> run_end_us) {
  struct Span {
    std::uint64_t birth;
    std::optional<std::uint64_t> death;
  };
  std::map<std::uint64_t, Span> spans;
  std::uint64_t last = 0;
  for (const auto& r : trace) {
    last = std::max(last, r.t_us);
    if (r.l_id == 0) continue;
    auto [it, fresh] = spans.try_emplace(r.l_id, Span{r.t_us, std::nullopt});
    if (!fresh) it->second.birth = std::min(it->second.birth, r.t_us);
    if (r.status == LineStatus::BadTrack && !it->second.death) it->second.death = r.t_us;
  }
  const std::uint64_t end = run_end_us.value_or(last);
  std::vector<double> out;
  out.reserve(spans.size());
  for (const auto& [id, s] : spans) {
    const std::uint64_t death = s.death.value_or(std::max(end, s.birth));
    out.push_back(static_cast<double>(death - s.birth) * 1e-6);
  }
  return out;
}

LifetimeStats summarize_lifetimes(std::span<const double> lifetimes) {
  LifetimeStats st;
  st.count = lifetimes.size();
  if (lifetimes.empty()) return st;
  const double n = static_cast<double>(lifetimes.size());
  st.mean = std::accumulate(lifetimes.begin(), lifetimes.end(), 0.0) / n;
  double var = 0;
  for (double d : lifetimes) var += (d - st.mean) * (d - st.mean);
  st.std = std::sqrt(var / n);
  st.max = *std::max_element(lifetimes.begin(), lifetimes.end());
  return st;
}

LifetimeStats lifetime_stats(std::span<const TraceRow> trace,
                             std::optional<std::uint64_t> run_end_us) {
  const auto lifetimes = segment_lifetimes(trace, run_end_us);
  return summarize_lifetimes(lifetimes);
}

}  // namespace evline
