#pragma once

#include <optional>
#include <span>

#include "evline/geometry.hpp"
#include "evline/scarf.hpp"

namespace evline {

// Segment hypothesis between two sub-pixel endpoints.
struct Candidate {
  Vec2 q0;
  Vec2 q1;

  Vec2 vector() const noexcept { return q1 - q0; }
  double length() const noexcept { return norm(q1 - q0); }
  Vec2 midpoint() const noexcept { return (q0 + q1) * 0.5; }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct ScoreParams {
  double d_max = 1.6;         // perpendicular distance threshold [px], strict
  std::size_t capacity = 64;  // normaliser of the effective ratio
  int block_size = 8;         // sizes the occupancy token array
};

struct Distances {
  double d1;  // perpendicular distance to the line, >= 0
  double d2;  // signed distance of the projection along q0 -> q1
};

Distances distances(Vec2 q, const Candidate& cand);

// Fraction of unit-length bins along the segment that hold at least one event
// closer than d_max to the line, clamped to [0, 1].
double occupancy_ratio(std::span<const StoredEvent> events, const Candidate& cand,
                       const ScoreParams& params);

// Active events closer than d_max to the line, over the buffer capacity.
double effective_ratio(std::span<const StoredEvent> events, const Candidate& cand,
                       const ScoreParams& params);

struct Score {
  double occupancy = 0;
  double effective = 0;
  double f = 0;
};

// f = occupancy * effective, computed in one pass. Degenerate candidates score 0.
Score fitting_score(std::span<const StoredEvent> events, const Candidate& cand,
                    const ScoreParams& params);

// Infinite line through `point` along the unit vector `direction`.
struct Line {
  Vec2 point;
  Vec2 direction;
};

// Eigenvalue ratio (small / large) above which a scatter counts as isotropic.
inline constexpr double kIsotropyLimit = 0.9;

// Total least squares over the event positions. nullopt for fewer than two
// distinct points or an isotropic scatter.
std::optional<Line> fit_line(std::span<const StoredEvent> events);
std::optional<Line> fit_line(std::span<const Vec2> points);

// Intersections of the line with the rectangle boundary, smaller (x, y) first.
// nullopt when the line misses the rectangle or only grazes a corner.
std::optional<Candidate> clip_to_block(const Line& line, const Rect& rect);

}  // namespace evline
