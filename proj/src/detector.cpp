#include "evline/detector.hpp"

namespace evline {

namespace {

std::optional<LineSegment> detect_from_snapshot(BlockCoord block, const Snapshot& snap,
                                                const ScarfStorage& storage,
                                                const LineParams& params, LatticeState& state,
                                                std::uint64_t now_us) {
  if (snap.events.size() < params.min_events) return std::nullopt;
  const auto line = fit_line(std::span<const StoredEvent>(snap.events));
  if (!line) return std::nullopt;
  const auto cand = clip_to_block(*line, storage.geometry().active_rect(block));
  if (!cand) return std::nullopt;
  const ScoreParams sp{params.d_max, snap.capacity, storage.geometry().block_size()};
  const Score score = fitting_score(snap.events, *cand, sp);
  if (!(score.f > params.f_th)) return std::nullopt;

  LineSegment seg;
  seg.q0 = cand->q0;
  seg.q1 = cand->q1;
  seg.f = score.f;
  seg.status = LineStatus::Detected;
  seg.admin = block;
  seg.l_id = state.allocate_id();
  seg.birth_us = now_us;
  return seg;
}

}  // namespace

std::optional<LineSegment> detect_block(BlockCoord block, const ScarfStorage& storage,
                                        const LineParams& params, LatticeState& state,
                                        std::uint64_t now_us) {
  const Snapshot snap = storage.snapshot(block, SnapshotFilter::active_only);
  return detect_from_snapshot(block, snap, storage, params, state, now_us);
}

std::vector<LineSegment> detection_pass(const ScarfStorage& storage, LatticeState& state,
                                        const LineParams& params, std::uint64_t now_us,
                                        Trace* trace) {
  std::vector<LineSegment> created;
  const auto& geo = storage.geometry();
  Snapshot snap;
  for (std::size_t i = 0; i < geo.block_count(); ++i) {
    const BlockCoord block = geo.coord(i);
    if (state.status(block) != LineStatus::NoDetect) continue;
    storage.snapshot_into(std::span<const BlockCoord>(&block, 1), SnapshotFilter::active_only,
                          snap);
    if (snap.events.size() < params.min_events) continue;
    auto seg = detect_from_snapshot(block, snap, storage, params, state, now_us);
    if (!seg) continue;
    // The tracker may have claimed or suppressed the block meanwhile.
    const bool installed = state.with_block(block, [&](BlockLine& line) {
      if (line.status != LineStatus::NoDetect) return false;
      line.segment = *seg;
      state.transition(line, LineStatus::Detected, TransitionCause::detect);
      // Appended under the block lock so the row precedes any tracking row.
      if (trace) trace->append(make_row(now_us, *seg));
      return true;
    });
    if (!installed) continue;
    created.push_back(*seg);
  }
  return created;
}

}  // namespace evline
