#include "evline/linefit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace evline {

namespace {

constexpr double kSnapEps = 1e-9;

std::size_t token_count(double length, int block_size) {
  const auto diagonal_range =
      static_cast<std::size_t>(std::floor(std::numbers::sqrt2 * block_size));
  const auto length_range = static_cast<std::size_t>(std::floor(length));
  return std::max(diagonal_range, length_range) + 1;
}

// Marks occupancy tokens; small arrays live on the stack.
class TokenSet {
 public:
  explicit TokenSet(std::size_t n) : n_(n) {
    if (n_ > stack_.size()) heap_.assign(n_, 0);
    else std::fill_n(stack_.begin(), n_, std::uint8_t{0});
  }
  void set(std::size_t i) noexcept {
    auto* d = data();
    count_ += d[i] == 0;
    d[i] = 1;
  }
  std::size_t count() const noexcept { return count_; }

 private:
  std::uint8_t* data() noexcept { return heap_.empty() ? stack_.data() : heap_.data(); }
  std::size_t n_;
  std::size_t count_ = 0;
  std::array<std::uint8_t, 256> stack_;
  std::vector<std::uint8_t> heap_;
};

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

Distances distances(Vec2 q, const Candidate& cand) {
  const Vec2 l = cand.vector();
  const double len = norm(l);
  if (!(len > 0.0)) throw std::invalid_argument("degenerate candidate (zero length)");
  const Vec2 r = q - cand.q0;
  return {std::abs(cross(r, l)) / len, dot(r, l) / len};
}

double occupancy_ratio(std::span<const StoredEvent> events, const Candidate& cand,
                       const ScoreParams& params) {
  const double len = cand.length();
  if (!(len > 0.0)) return 0.0;
  TokenSet tokens(token_count(len, params.block_size));
  for (const auto& e : events) {
    const auto [d1, d2] = distances({static_cast<double>(e.u), static_cast<double>(e.v)}, cand);
    if (d1 < params.d_max && d2 >= 0.0 && d2 < len) {
      tokens.set(static_cast<std::size_t>(std::floor(d2)));
    }
  }
  return clamp01(static_cast<double>(tokens.count()) / len);
}

double effective_ratio(std::span<const StoredEvent> events, const Candidate& cand,
                       const ScoreParams& params) {
  if (params.capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  const double len = cand.length();
  if (!(len > 0.0)) return 0.0;
  std::size_t count = 0;
  for (const auto& e : events) {
    if (!e.active) continue;
    const auto d = distances({static_cast<double>(e.u), static_cast<double>(e.v)}, cand);
    if (d.d1 < params.d_max) ++count;
  }
  return clamp01(static_cast<double>(count) / static_cast<double>(params.capacity));
}

Score fitting_score(std::span<const StoredEvent> events, const Candidate& cand,
                    const ScoreParams& params) {
  if (params.capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  const Vec2 l = cand.vector();
  const double len = norm(l);
  if (!(len > 0.0)) return {};
  const Vec2 unit = l / len;
  TokenSet tokens(token_count(len, params.block_size));
  std::size_t effective = 0;
  for (const auto& e : events) {
    const Vec2 r{e.u - cand.q0.x, e.v - cand.q0.y};
    const double d1 = std::abs(cross(r, unit));
    if (!(d1 < params.d_max)) continue;
    if (e.active) ++effective;
    const double d2 = dot(r, unit);
    if (d2 >= 0.0 && d2 < len) tokens.set(static_cast<std::size_t>(d2));
  }
  Score s;
  s.occupancy = clamp01(static_cast<double>(tokens.count()) / len);
  s.effective = clamp01(static_cast<double>(effective) / static_cast<double>(params.capacity));
  s.f = s.occupancy * s.effective;
  return s;
}

std::optional<Line> fit_line(std::span<const Vec2> points) {
  if (points.size() < 2) return std::nullopt;
  Vec2 c{};
  for (const auto& p : points) c = c + p;
  c = c / static_cast<double>(points.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : points) {
    const Vec2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double trace = sxx + syy;
  const double disc = std::hypot(sxx - syy, 2.0 * sxy);
  const double large = 0.5 * (trace + disc);
  const double small = 0.5 * (trace - disc);
  if (!(large > 1e-12)) return std::nullopt;
  if (small / large > kIsotropyLimit) return std::nullopt;
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Vec2 dir{std::cos(theta), std::sin(theta)};
  if (dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0)) dir = dir * -1.0;
  return Line{c, dir};
}

std::optional<Line> fit_line(std::span<const StoredEvent> events) {
  std::vector<Vec2> pts;
  pts.reserve(events.size());
  for (const auto& e : events) pts.push_back({static_cast<double>(e.u), static_cast<double>(e.v)});
  return fit_line(std::span<const Vec2>(pts));
}

std::optional<Candidate> clip_to_block(const Line& line, const Rect& rect) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto iv = clip_parametric(line.point, line.point + line.direction, rect, -inf, inf);
  if (!iv || !std::isfinite(iv->t_in) || !std::isfinite(iv->t_out)) return std::nullopt;
  auto at = [&](double t) {
    Vec2 p = line.point + line.direction * t;
    // Land exactly on the boundary the intersection belongs to.
    for (double edge : {rect.x0, rect.x1}) {
      if (std::abs(p.x - edge) < kSnapEps) p.x = edge;
    }
    for (double edge : {rect.y0, rect.y1}) {
      if (std::abs(p.y - edge) < kSnapEps) p.y = edge;
    }
    p.x = std::clamp(p.x, rect.x0, rect.x1);
    p.y = std::clamp(p.y, rect.y0, rect.y1);
    return p;
  };
  Vec2 a = at(iv->t_in);
  Vec2 b = at(iv->t_out);
  if (norm(b - a) < kSnapEps) return std::nullopt;
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  return Candidate{a, b};
}

}  // namespace evline
