#include "evline/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evline {

namespace {
constexpr double kTouchEps = 1e-9;
}

LatticeGeometry::LatticeGeometry(SensorGeometry sensor, int block_size)
    : sensor_(sensor), b_(block_size), half_(block_size / 2) {
  if (sensor.width <= 0 || sensor.height <= 0) {
    throw std::invalid_argument("sensor dimensions must be positive");
  }
  if (block_size < 2 || block_size % 2 != 0) {
    throw std::invalid_argument("block size must be even and >= 2, got " +
                                std::to_string(block_size));
  }
  nx_ = (sensor.width + b_ - 1) / b_;
  ny_ = (sensor.height + b_ - 1) / b_;
}

BlockCoord LatticeGeometry::active_block_of(int u, int v) const {
  if (!sensor_.contains(u, v)) {
    throw std::out_of_range("pixel (" + std::to_string(u) + "," + std::to_string(v) +
                            ") outside sensor");
  }
  return {u / b_, v / b_};
}

InactiveSet LatticeGeometry::inactive_blocks_unchecked(int u, int v) const noexcept {
  const int au = u / b_;
  const int av = v / b_;
  const int lu = u - au * b_;
  const int lv = v - av * b_;

  // Neighbour column/row whose margin reaches the pixel; strict at exactly b/2.
  int du = 0;
  if (lu < half_ && au > 0) {
    du = -1;
  } else if (lu > b_ - half_ && au + 1 < nx_) {
    du = 1;
  }
  int dv = 0;
  if (lv < half_ && av > 0) {
    dv = -1;
  } else if (lv > b_ - half_ && av + 1 < ny_) {
    dv = 1;
  }

  InactiveSet out;
  if (du != 0) out.blocks[out.count++] = {au + du, av};
  if (dv != 0) out.blocks[out.count++] = {au, av + dv};
  if (du != 0 && dv != 0) out.blocks[out.count++] = {au + du, av + dv};
  return out;
}

InactiveSet LatticeGeometry::inactive_blocks_of(int u, int v) const {
  if (!sensor_.contains(u, v)) {
    throw std::out_of_range("pixel (" + std::to_string(u) + "," + std::to_string(v) +
                            ") outside sensor");
  }
  return inactive_blocks_unchecked(u, v);
}

Rect LatticeGeometry::active_rect(BlockCoord c) const noexcept {
  const double x0 = static_cast<double>(c.ru) * b_;
  const double y0 = static_cast<double>(c.rv) * b_;
  return {x0, y0, std::min(x0 + b_, static_cast<double>(sensor_.width)),
          std::min(y0 + b_, static_cast<double>(sensor_.height))};
}

std::optional<BlockCoord> LatticeGeometry::block_at(Vec2 p) const noexcept {
  if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= sensor_.width && p.y <= sensor_.height)) {
    return std::nullopt;
  }
  BlockCoord c{static_cast<int>(std::floor(p.x / b_)), static_cast<int>(std::floor(p.y / b_))};
  c.ru = std::min(c.ru, nx_ - 1);
  c.rv = std::min(c.rv, ny_ - 1);
  return c;
}

std::vector<BlockCoord> LatticeGeometry::blocks_crossed(Vec2 q0, Vec2 q1) const {
  std::vector<BlockCoord> out;
  const double len = norm(q1 - q0);
  if (len == 0.0) {
    if (auto c = block_at(q0)) out.push_back(*c);
    return out;
  }
  const auto clamp_col = [&](double x) {
    return std::clamp(static_cast<int>(std::floor(x / b_)), 0, nx_ - 1);
  };
  const auto clamp_row = [&](double y) {
    return std::clamp(static_cast<int>(std::floor(y / b_)), 0, ny_ - 1);
  };
  const int ru_lo = std::max(0, clamp_col(std::min(q0.x, q1.x)) - 1);
  const int ru_hi = std::min(nx_ - 1, clamp_col(std::max(q0.x, q1.x)) + 1);
  const int rv_lo = std::max(0, clamp_row(std::min(q0.y, q1.y)) - 1);
  const int rv_hi = std::min(ny_ - 1, clamp_row(std::max(q0.y, q1.y)) + 1);

  for (int rv = rv_lo; rv <= rv_hi; ++rv) {
    for (int ru = ru_lo; ru <= ru_hi; ++ru) {
      const Rect r = active_rect({ru, rv});
      const auto iv = clip_parametric(q0, q1, r, 0.0, 1.0);
      if (!iv) continue;
      if ((iv->t_out - iv->t_in) * len > kTouchEps) {
        out.push_back({ru, rv});
        continue;
      }
      // Single-point touch: only a corner passed strictly inside the segment counts.
      const double t = 0.5 * (iv->t_in + iv->t_out);
      if (t * len <= kTouchEps || (1.0 - t) * len <= kTouchEps) continue;
      const Vec2 p = lerp(q0, q1, t);
      const bool on_x = std::abs(p.x - r.x0) <= kTouchEps || std::abs(p.x - r.x1) <= kTouchEps;
      const bool on_y = std::abs(p.y - r.y0) <= kTouchEps || std::abs(p.y - r.y1) <= kTouchEps;
      if (on_x && on_y) out.push_back({ru, rv});
    }
  }
  return out;
}

}  // namespace evline
