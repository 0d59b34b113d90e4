#include "evline/line_state.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <mutex>
#include <unordered_set>

namespace evline {

std::string_view to_string(LineStatus s) noexcept {
  switch (s) {
    case LineStatus::NoDetect: return "NoDetect";
    case LineStatus::Detected: return "Detected";
    case LineStatus::ProhibitDetection: return "ProhibitDetection";
    case LineStatus::BadTrack: return "BadTrack";
    case LineStatus::GoodTrack: return "GoodTrack";
  }
  return "?";
}

std::optional<LineStatus> parse_line_status(std::string_view s) noexcept {
  for (auto st : {LineStatus::NoDetect, LineStatus::Detected, LineStatus::ProhibitDetection,
                  LineStatus::BadTrack, LineStatus::GoodTrack}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

bool legal_transition(LineStatus from, LineStatus to, TransitionCause cause) noexcept {
  using S = LineStatus;
  switch (cause) {
    case TransitionCause::detect: return from == S::NoDetect && to == S::Detected;
    case TransitionCause::track:
      return (from == S::Detected || from == S::GoodTrack) &&
             (to == S::GoodTrack || to == S::BadTrack);
    case TransitionCause::retire: return from == S::BadTrack && to == S::NoDetect;
    case TransitionCause::suppress: return from == S::NoDetect && to == S::ProhibitDetection;
    case TransitionCause::release: return from == S::ProhibitDetection && to == S::NoDetect;
    case TransitionCause::transfer_in:
      return (from == S::NoDetect || from == S::ProhibitDetection) && to == S::GoodTrack;
    case TransitionCause::transfer_out:
      return from == S::GoodTrack && to == S::ProhibitDetection;
  }
  return false;
}

bool legal_segment_transition(LineStatus from, LineStatus to) noexcept {
  using S = LineStatus;
  switch (from) {
    case S::Detected:
    case S::GoodTrack: return to == S::GoodTrack || to == S::BadTrack;
    case S::BadTrack: return to == S::NoDetect;
    default: return false;
  }
}

std::size_t default_min_events(std::size_t buffer_capacity) {
  const auto tenth = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(buffer_capacity)));
  return std::max<std::size_t>(4, tenth);
}

LineParams LineParams::defaults(int block_size, std::size_t buffer_capacity, double delta_q) {
  LineParams p;
  p.f_th = 0.2;
  p.d_max = 0.2 * block_size;
  p.min_events = default_min_events(buffer_capacity);
  p.delta_q = delta_q;
  p.corner_radius = delta_q;
  p.suppress_radius = block_size / 4.0;
  return p;
}

LatticeState::LatticeState(const LatticeGeometry& geometry) : geometry_(geometry) {
  cells_.reserve(geometry_.block_count());
  for (std::size_t i = 0; i < geometry_.block_count(); ++i) {
    cells_.push_back(std::make_unique<Cell>());
  }
}

void LatticeState::transition(BlockLine& line, LineStatus to, TransitionCause cause) noexcept {
  count_.fetch_add(1, std::memory_order_relaxed);
  if (!legal_transition(line.status, to, cause)) {
    illegal_.fetch_add(1, std::memory_order_relaxed);
    assert(!"illegal line status transition");
  }
  line.status = to;
  if (line.segment && is_live(to)) line.segment->status = to;
}

std::vector<LineSegment> LatticeState::live_segments() const {
  std::vector<LineSegment> out;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    std::lock_guard<SpinLock> guard(cells_[i]->lock);
    const auto& line = cells_[i]->line;
    if (is_live(line.status) && line.segment) out.push_back(*line.segment);
  }
  return out;
}

std::size_t LatticeState::count_status(LineStatus s) const {
  std::size_t n = 0;
  for (const auto& cell : cells_) {
    std::lock_guard<SpinLock> guard(cell->lock);
    n += cell->line.status == s;
  }
  return n;
}

bool LatticeState::admin_unique() const {
  std::unordered_set<std::uint64_t> ids;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    std::lock_guard<SpinLock> guard(cells_[i]->lock);
    const auto& line = cells_[i]->line;
    if (is_live(line.status) != line.segment.has_value()) return false;
    if (!line.segment) continue;
    if (line.segment->admin != geometry_.coord(i)) return false;
    if (!ids.insert(line.segment->l_id).second) return false;
  }
  return true;
}

TraceRow make_row(std::uint64_t t_us, const LineSegment& seg) {
  return {t_us,       seg.l_id,   seg.status, seg.admin.ru, seg.admin.rv,
          seg.q0.x,   seg.q0.y,   seg.q1.x,   seg.q1.y,     seg.f};
}

TraceRow make_block_row(std::uint64_t t_us, BlockCoord c, LineStatus status) {
  TraceRow row;
  row.t_us = t_us;
  row.status = status;
  row.ru = c.ru;
  row.rv = c.rv;
  return row;
}

}  // namespace evline
