#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "evline/events.hpp"
#include "evline/geometry.hpp"

namespace evline {

struct BlockCoord {
  int ru = 0;  // block column
  int rv = 0;  // block row

  friend constexpr bool operator==(BlockCoord, BlockCoord) = default;
  friend constexpr auto operator<=>(BlockCoord a, BlockCoord b) {
    // Row-major: compare rows first.
    if (auto c = a.rv <=> b.rv; c != 0) return c;
    return a.ru <=> b.ru;
  }
};

// Up to three neighbouring blocks whose inactive margin contains a pixel.
struct InactiveSet {
  std::array<BlockCoord, 3> blocks{};
  int count = 0;

  const BlockCoord* begin() const noexcept { return blocks.data(); }
  const BlockCoord* end() const noexcept { return blocks.data() + count; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(count); }
  bool empty() const noexcept { return count == 0; }
};

// Block grid over the sensor. Block (ru, rv) owns pixels [ru*b, (ru+1)*b) x [rv*b, (rv+1)*b);
// its inactive margin extends b/2 beyond every side, with exactly-b/2 excluded.
class LatticeGeometry {
 public:
  LatticeGeometry(SensorGeometry sensor, int block_size);

  const SensorGeometry& sensor() const noexcept { return sensor_; }
  int block_size() const noexcept { return b_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  std::size_t block_count() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }

  bool valid(BlockCoord c) const noexcept {
    return c.ru >= 0 && c.rv >= 0 && c.ru < nx_ && c.rv < ny_;
  }
  std::size_t index(BlockCoord c) const noexcept {
    return static_cast<std::size_t>(c.rv) * nx_ + c.ru;
  }
  BlockCoord coord(std::size_t index) const noexcept {
    return {static_cast<int>(index % nx_), static_cast<int>(index / nx_)};
  }

  BlockCoord active_block_of(int u, int v) const;
  InactiveSet inactive_blocks_of(int u, int v) const;

  // Unchecked variants for the ingestion hot path; caller guarantees bounds.
  std::size_t active_index_unchecked(int u, int v) const noexcept {
    return static_cast<std::size_t>(v / b_) * nx_ + static_cast<std::size_t>(u / b_);
  }
  InactiveSet inactive_blocks_unchecked(int u, int v) const noexcept;

  // Active region clipped to the sensor, as a closed rectangle in pixel coordinates.
  Rect active_rect(BlockCoord c) const noexcept;

  // Block containing a continuous point, or nullopt when outside the lattice.
  std::optional<BlockCoord> block_at(Vec2 p) const noexcept;

  // Blocks whose active region the segment passes through. A block counts when the
  // overlap has positive length, or when the segment passes through one of its
  // corners strictly between its endpoints. Returned in row-major order.
  std::vector<BlockCoord> blocks_crossed(Vec2 q0, Vec2 q1) const;

 private:
  SensorGeometry sensor_;
  int b_;
  int half_;
  int nx_;
  int ny_;
};

}  // namespace evline
