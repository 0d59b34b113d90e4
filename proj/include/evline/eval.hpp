#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "evline/events.hpp"
#include "evline/geometry.hpp"
#include "evline/scarf.hpp"
#include "evline/trace.hpp"

namespace evline {

// Binary pixel mask, row-major.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y) { data[static_cast<std::size_t>(y) * width + x] = 1; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const Mask&, const Mask&) = default;
};

// Bresenham traversal between the rounded endpoints, clamped to the mask.
void draw_segment(Mask& mask, Vec2 a, Vec2 b);
Mask rasterize(std::span<const std::pair<Vec2, Vec2>> segments, SensorGeometry sensor);

// Squared Euclidean distance from every pixel to the nearest set pixel; infinity
// when the mask is empty.
std::vector<double> squared_distance_transform(const Mask& mask);

struct HeatMapParams {
  double tolerance_fraction = 0.01;  // of the sensor diagonal
};

// tolerance_fraction * diagonal, rounded to 0.01 px.
double tolerance_px(SensorGeometry sensor, double tolerance_fraction);

struct PRPoint {
  double t = 0;  // seconds
  double precision = 1;
  double recall = 1;
  double f_score = 1;
};

double harmonic_mean(double precision, double recall);

// Pixel precision/recall within distance <= tau (inclusive). An empty prediction
// has precision 1; an empty ground truth has recall 1.
PRPoint pr_at(const Mask& pred, const Mask& gt, double tau_px, double t_s = 0);

// Cumulative masks at each whole second: predictions are the Detected/GoodTrack
// segment rows with t <= s, ground truth the rows with t <= s.
std::vector<PRPoint> pr_series(std::span<const TraceRow> trace,
                               std::span<const GroundTruthSegment> gt, SensorGeometry sensor,
                               const HeatMapParams& params,
                               std::optional<std::uint64_t> end_us = std::nullopt);

// Cumulative prediction (255) over ground truth (96) masks at second s.
GrayImage heat_map_frame(std::span<const TraceRow> trace, std::span<const GroundTruthSegment> gt,
                         SensorGeometry sensor, std::uint64_t t_us);

void write_pr_csv(std::span<const PRPoint> points, const std::filesystem::path& path);

struct LifetimeStats {
  std::size_t count = 0;
  double mean = 0;
  double std = 0;  // population
  double max = 0;
};

// Seconds from each l_id's first row to its first BadTrack row, or to run_end_us
// (default: last trace timestamp) for segments still live.
std::vector<double> segment_lifetimes(std::span<const TraceRow> trace,
                                      std::optional<std::uint64_t> run_end_us = std::nullopt);
LifetimeStats summarize_lifetimes(std::span<const double> lifetimes);
LifetimeStats lifetime_stats(std::span<const TraceRow> trace,
                             std::optional<std::uint64_t> run_end_us = std::nullopt);

}  // namespace evline
