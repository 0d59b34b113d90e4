#include "evline/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace evline {

namespace {

// Nearest lattice line coordinate along one axis; the sensor edge counts as a
// line when the extent is not a multiple of the block size.
double nearest_line(double coord, int b, int extent) {
  const double last = std::floor(static_cast<double>(extent) / b) * b;
  double best = std::clamp(std::round(coord / b) * b, 0.0, last);
  if (std::abs(coord - extent) < std::abs(coord - best)) best = extent;
  return best;
}

struct LatticeProximity {
  double vx;  // nearest vertical line
  double hy;  // nearest horizontal line
  double dx;  // distance to vx
  double dy;  // distance to hy
};

LatticeProximity proximity(Vec2 q, const LatticeGeometry& g) {
  const int b = g.block_size();
  LatticeProximity p;
  p.vx = nearest_line(q.x, b, g.sensor().width);
  p.hy = nearest_line(q.y, b, g.sensor().height);
  p.dx = std::abs(q.x - p.vx);
  p.dy = std::abs(q.y - p.hy);
  return p;
}

Vec2 axis_vector(Axis a) { return a == Axis::X ? Vec2{1, 0} : Vec2{0, 1}; }

bool inside_view(Vec2 q, const SensorGeometry& s) {
  return q.x >= 0.0 && q.y >= 0.0 && q.x <= s.width && q.y <= s.height;
}

}  // namespace

bool in_corner_mode(Vec2 endpoint, const LatticeGeometry& geometry, double corner_radius) {
  const auto p = proximity(endpoint, geometry);
  return std::hypot(p.dx, p.dy) < corner_radius;
}

Axis perturbation_axis(Vec2 endpoint, Vec2 segment_vector, const LatticeGeometry& geometry,
                       double corner_radius) {
  const auto p = proximity(endpoint, geometry);
  if (std::hypot(p.dx, p.dy) < corner_radius) {
    // Normal of the segment is (-Ly, Lx); pick the axis it leans towards.
    const double nx = std::abs(segment_vector.y);
    const double ny = std::abs(segment_vector.x);
    return nx >= ny ? Axis::X : Axis::Y;
  }
  return p.dx <= p.dy ? Axis::Y : Axis::X;
}

Vec2 snap_to_lattice(Vec2 endpoint, const LatticeGeometry& geometry, double corner_radius) {
  const auto p = proximity(endpoint, geometry);
  if (std::hypot(p.dx, p.dy) < corner_radius) return endpoint;
  if (p.dx <= p.dy) return {p.vx, endpoint.y};
  return {endpoint.x, p.hy};
}

std::array<Candidate, kHypothesisCount> hypotheses(const Candidate& state,
                                                   const LatticeGeometry& geometry,
                                                   double delta_q, double corner_radius) {
  const Vec2 l = state.vector();
  const Vec2 d0 = axis_vector(perturbation_axis(state.q0, l, geometry, corner_radius)) * delta_q;
  const Vec2 d1 = axis_vector(perturbation_axis(state.q1, l, geometry, corner_radius)) * delta_q;
  return {{state,
           {state.q0 + d0, state.q1},
           {state.q0 - d0, state.q1},
           {state.q0, state.q1 + d1},
           {state.q0, state.q1 - d1}}};
}

TrackResult track_segment(const LineSegment& seg, const ScarfStorage& storage,
                          const LineParams& params) {
  Snapshot scratch;
  return track_segment(seg, storage, params, scratch);
}

TrackResult track_segment(const LineSegment& seg, const ScarfStorage& storage,
                          const LineParams& params, Snapshot& scratch) {
  const auto& geo = storage.geometry();
  TrackResult result;
  result.segment = seg;

  const Candidate base{snap_to_lattice(seg.q0, geo, params.corner_radius),
                       snap_to_lattice(seg.q1, geo, params.corner_radius)};
  if (!(base.length() > 0.0)) {
    result.segment.f = 0.0;
    result.segment.status = LineStatus::BadTrack;
    return result;
  }

  // The event set is fixed from the current state for all five hypotheses.
  const auto crossed = geo.blocks_crossed(base.q0, base.q1);
  result.blocks_used = crossed.size();
  if (crossed.size() > 1) {
    storage.snapshot_into(crossed, SnapshotFilter::active_only, scratch);
  } else if (geo.valid(seg.admin)) {
    storage.snapshot_into(std::span<const BlockCoord>(&seg.admin, 1),
                          SnapshotFilter::active_and_inactive, scratch);
  } else {
    scratch.events.clear();
    scratch.capacity = storage.block_capacity();
  }

  const ScoreParams sp{params.d_max, std::max<std::size_t>(1, scratch.capacity),
                       geo.block_size()};
  const auto hyps = hypotheses(base, geo, params.delta_q, params.corner_radius);
  double best = -1.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    result.scores[i] = fitting_score(scratch.events, hyps[i], sp).f;
    if (result.scores[i] > best) {
      best = result.scores[i];
      result.chosen = i;
    }
  }

  auto& out = result.segment;
  out.q0 = hyps[result.chosen].q0;
  out.q1 = hyps[result.chosen].q1;
  out.f = best;
  out.status = best >= params.f_th ? LineStatus::GoodTrack : LineStatus::BadTrack;
  if (crossed.empty() || !inside_view(out.q0, geo.sensor()) ||
      !inside_view(out.q1, geo.sensor())) {
    out.status = LineStatus::BadTrack;
  }
  return result;
}

std::vector<BlockCoord> suppression_targets(const LineSegment& seg, const LatticeGeometry& geometry,
                                            double suppress_radius) {
  std::vector<BlockCoord> out;
  if (!geometry.valid(seg.admin)) return out;
  const Rect r = geometry.active_rect(seg.admin);
  const Vec2 m = seg.midpoint();
  const BlockCoord a = seg.admin;
  auto add = [&](BlockCoord c) {
    if (geometry.valid(c)) out.push_back(c);
  };
  if (std::abs(m.x - r.x0) < suppress_radius) add({a.ru - 1, a.rv});
  if (std::abs(r.x1 - m.x) < suppress_radius) add({a.ru + 1, a.rv});
  if (std::abs(m.y - r.y0) < suppress_radius) add({a.ru, a.rv - 1});
  if (std::abs(r.y1 - m.y) < suppress_radius) add({a.ru, a.rv + 1});
  return out;
}

std::vector<BlockCoord> suppression_keep(const LineSegment& seg, const LatticeGeometry& geometry,
                                         double suppress_radius) {
  std::vector<BlockCoord> out;
  const Vec2 m = seg.midpoint();
  const int b = geometry.block_size();
  const int ru_lo = static_cast<int>(std::floor((m.x - suppress_radius) / b));
  const int ru_hi = static_cast<int>(std::floor((m.x + suppress_radius) / b));
  const int rv_lo = static_cast<int>(std::floor((m.y - suppress_radius) / b));
  const int rv_hi = static_cast<int>(std::floor((m.y + suppress_radius) / b));
  for (int rv = rv_lo; rv <= rv_hi; ++rv) {
    for (int ru = ru_lo; ru <= ru_hi; ++ru) {
      const BlockCoord c{ru, rv};
      if (!geometry.valid(c) || c == seg.admin) continue;
      if (geometry.active_rect(c).distance_to(m) < suppress_radius) out.push_back(c);
    }
  }
  return out;
}

TransferOutcome transfer_admin(LineSegment& seg, LatticeState& state, std::uint64_t now_us,
                               Trace* trace) {
  const auto target = state.geometry().block_at(seg.midpoint());
  if (!target) return TransferOutcome::out_of_view;
  if (*target == seg.admin) return TransferOutcome::unchanged;

  const BlockCoord old_admin = seg.admin;
  LineSegment moved = seg;
  moved.admin = *target;
  const bool claimed = state.with_block(*target, [&](BlockLine& line) {
    if (line.status != LineStatus::NoDetect && line.status != LineStatus::ProhibitDetection) {
      return false;
    }
    line.segment = moved;
    state.transition(line, LineStatus::GoodTrack, TransitionCause::transfer_in);
    if (trace) trace->append(make_row(now_us, moved));
    return true;
  });
  if (!claimed) return TransferOutcome::collision;

  state.with_block(old_admin, [&](BlockLine& line) {
    if (line.segment && line.segment->l_id == seg.l_id) line.segment.reset();
    state.transition(line, LineStatus::ProhibitDetection, TransitionCause::transfer_out);
    if (trace) trace->append(make_block_row(now_us, old_admin, LineStatus::ProhibitDetection));
  });
  seg = moved;
  return TransferOutcome::moved;
}

std::pair<std::size_t, std::size_t> update_suppression(std::span<const LineSegment> live,
                                                       LatticeState& state,
                                                       const LineParams& params,
                                                       std::uint64_t now_us, Trace* trace) {
  const auto& geo = state.geometry();
  std::vector<std::uint8_t> apply(geo.block_count(), 0);
  std::vector<std::uint8_t> keep(geo.block_count(), 0);
  for (const auto& seg : live) {
    for (const auto& c : suppression_targets(seg, geo, params.suppress_radius)) {
      apply[geo.index(c)] = 1;
      keep[geo.index(c)] = 1;
    }
    for (const auto& c : suppression_keep(seg, geo, params.suppress_radius)) {
      keep[geo.index(c)] = 1;
    }
  }
  std::size_t suppressed = 0;
  std::size_t released = 0;
  for (std::size_t i = 0; i < geo.block_count(); ++i) {
    const BlockCoord c = geo.coord(i);
    state.with_block(c, [&](BlockLine& line) {
      if (line.status == LineStatus::NoDetect && apply[i]) {
        state.transition(line, LineStatus::ProhibitDetection, TransitionCause::suppress);
        if (trace) trace->append(make_block_row(now_us, c, LineStatus::ProhibitDetection));
        ++suppressed;
      } else if (line.status == LineStatus::ProhibitDetection && !keep[i]) {
        state.transition(line, LineStatus::NoDetect, TransitionCause::release);
        if (trace) trace->append(make_block_row(now_us, c, LineStatus::NoDetect));
        ++released;
      }
    });
  }
  return {suppressed, released};
}

TrackingStats tracking_pass(const ScarfStorage& storage, LatticeState& state,
                            const LineParams& params, std::uint64_t now_us, Trace* trace) {
  TrackingStats stats;
  const auto live = state.live_segments();
  std::vector<LineSegment> survivors;
  survivors.reserve(live.size());
  Snapshot scratch;

  for (const auto& seg : live) {
    const TrackResult r = track_segment(seg, storage, params, scratch);
    ++stats.tracked;
    stats.hypotheses += kHypothesisCount;
    LineSegment s = r.segment;

    const bool owned = state.with_block(seg.admin, [&](BlockLine& line) {
      if (!line.segment || line.segment->l_id != seg.l_id) return false;
      line.segment = s;
      state.transition(line, s.status, TransitionCause::track);
      if (trace) trace->append(make_row(now_us, s));
      return true;
    });
    if (!owned) continue;

    if (s.status == LineStatus::GoodTrack) {
      const auto outcome = transfer_admin(s, state, now_us, trace);
      if (outcome == TransferOutcome::moved) ++stats.transfers;
      if (outcome == TransferOutcome::collision) ++stats.collisions;
      if (outcome == TransferOutcome::out_of_view) ++stats.out_of_view;
      if (outcome == TransferOutcome::collision || outcome == TransferOutcome::out_of_view) {
        state.with_block(s.admin, [&](BlockLine& line) {
          s.status = LineStatus::BadTrack;
          line.segment = s;
          state.transition(line, LineStatus::BadTrack, TransitionCause::track);
          if (trace) trace->append(make_row(now_us, s));
        });
      }
    }

    if (s.status == LineStatus::BadTrack) {
      s.death_us = now_us;
      state.with_block(s.admin, [&](BlockLine& line) {
        line.segment.reset();
        state.transition(line, LineStatus::NoDetect, TransitionCause::retire);
        if (trace) {
          LineSegment ended = s;
          ended.status = LineStatus::NoDetect;
          trace->append(make_row(now_us, ended));
        }
      });
      ++stats.retired;
      continue;
    }
    ++stats.good;
    survivors.push_back(s);
  }

  const auto [suppressed, released] = update_suppression(survivors, state, params, now_us, trace);
  stats.suppressed = suppressed;
  stats.released = released;
  stats.live_after = survivors.size();
  return stats;
}

}  // namespace evline
