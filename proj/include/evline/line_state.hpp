#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "evline/lattice.hpp"
#include "evline/line_status.hpp"
#include "evline/linefit.hpp"
#include "evline/spin_lock.hpp"
#include "evline/trace.hpp"

namespace evline {

struct LineSegment {
  Vec2 q0;
  Vec2 q1;
  double f = 0;
  LineStatus status = LineStatus::NoDetect;
  BlockCoord admin;
  std::uint64_t l_id = 0;
  std::uint64_t birth_us = 0;
  std::optional<std::uint64_t> death_us;

  Candidate candidate() const noexcept { return {q0, q1}; }
  Vec2 midpoint() const noexcept { return (q0 + q1) * 0.5; }
};

// Detection and tracking thresholds shared by both roles.
struct LineParams {
  double f_th = 0.2;
  double d_max = 1.6;
  std::size_t min_events = 7;
  double delta_q = 0.8;
  double corner_radius = 0.8;
  double suppress_radius = 2.0;

  // Defaults for a block size: d_max = 0.2 b, suppress radius b/4,
  // corner radius = delta_q.
  static LineParams defaults(int block_size, std::size_t buffer_capacity, double delta_q);
};

// max(4, ceil(0.1 N))
std::size_t default_min_events(std::size_t buffer_capacity);

// Status and owned segment of one lattice block.
struct BlockLine {
  LineStatus status = LineStatus::NoDetect;
  std::optional<LineSegment> segment;
};

// Per-block line state shared by detection and tracking. Every access goes
// through with_block(), which holds only that block's lock.
class LatticeState {
 public:
  explicit LatticeState(const LatticeGeometry& geometry);

  LatticeState(const LatticeState&) = delete;
  LatticeState& operator=(const LatticeState&) = delete;

  const LatticeGeometry& geometry() const noexcept { return geometry_; }

  template <typename Fn>
  decltype(auto) with_block(BlockCoord c, Fn&& fn) {
    Cell& cell = *cells_[geometry_.index(c)];
    std::lock_guard<SpinLock> guard(cell.lock);
    return fn(cell.line);
  }
  template <typename Fn>
  decltype(auto) with_block(BlockCoord c, Fn&& fn) const {
    const Cell& cell = *cells_[geometry_.index(c)];
    std::lock_guard<SpinLock> guard(cell.lock);
    return fn(static_cast<const BlockLine&>(cell.line));
  }

  LineStatus status(BlockCoord c) const {
    return with_block(c, [](const BlockLine& b) { return b.status; });
  }

  // Applies a status change and records whether it was legal. Illegal changes are
  // still applied so a run can finish and report them.
  void transition(BlockLine& line, LineStatus to, TransitionCause cause) noexcept;

  std::uint64_t allocate_id() noexcept { return next_id_.fetch_add(1, std::memory_order_relaxed); }

  std::uint64_t illegal_transitions() const noexcept {
    return illegal_.load(std::memory_order_relaxed);
  }
  std::uint64_t transitions() const noexcept { return count_.load(std::memory_order_relaxed); }

  // Copies of every live segment, row-major by admin block.
  std::vector<LineSegment> live_segments() const;
  std::size_t count_status(LineStatus s) const;

  // Each stored segment sits in its admin block, no l_id appears twice, and every
  // block whose status is live owns a segment.
  bool admin_unique() const;

 private:
  struct alignas(64) Cell {
    mutable SpinLock lock;
    BlockLine line;
  };

  LatticeGeometry geometry_;
  std::vector<std::unique_ptr<Cell>> cells_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> illegal_{0};
  std::atomic<std::uint64_t> count_{0};
};

TraceRow make_row(std::uint64_t t_us, const LineSegment& seg);
TraceRow make_block_row(std::uint64_t t_us, BlockCoord c, LineStatus status);

}  // namespace evline
