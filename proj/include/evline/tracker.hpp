#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "evline/line_state.hpp"
#include "evline/scarf.hpp"

namespace evline {

enum class Axis : std::uint8_t { X, Y };

// Direction along which an endpoint is perturbed. Off a block corner this is the
// lattice line the endpoint lies on (vertical line -> Y, horizontal line -> X).
// Within corner_radius of a lattice corner it is the axis closer to the segment
// normal, X on a tie.
Axis perturbation_axis(Vec2 endpoint, Vec2 segment_vector, const LatticeGeometry& geometry,
                       double corner_radius);

bool in_corner_mode(Vec2 endpoint, const LatticeGeometry& geometry, double corner_radius);

// Moves an endpoint outside corner mode onto its nearest lattice line.
Vec2 snap_to_lattice(Vec2 endpoint, const LatticeGeometry& geometry, double corner_radius);

inline constexpr std::size_t kHypothesisCount = 5;

// {x, q0 + dq, q0 - dq, q1 + dq, q1 - dq}, in that order.
std::array<Candidate, kHypothesisCount> hypotheses(const Candidate& state,
                                                   const LatticeGeometry& geometry,
                                                   double delta_q, double corner_radius);

struct TrackResult {
  LineSegment segment;                       // updated endpoints, score and status
  std::array<double, kHypothesisCount> scores{};
  std::size_t chosen = 0;                    // index into the hypothesis list
  std::size_t blocks_used = 0;               // |I(L)|
};

// One perturbation step. With more than one crossed block the hypotheses are scored
// on the union of active events of those blocks; otherwise on the admin block's
// active and inactive events.
TrackResult track_segment(const LineSegment& seg, const ScarfStorage& storage,
                          const LineParams& params);
TrackResult track_segment(const LineSegment& seg, const ScarfStorage& storage,
                          const LineParams& params, Snapshot& scratch);

// Edge-adjacent blocks across admin-block borders closer than suppress_radius to
// the segment midpoint.
std::vector<BlockCoord> suppression_targets(const LineSegment& seg, const LatticeGeometry& geometry,
                                            double suppress_radius);

// Blocks (other than the admin) whose active region lies within suppress_radius of
// the midpoint; a suppressed block stays suppressed while it is in this set for
// some live segment.
std::vector<BlockCoord> suppression_keep(const LineSegment& seg, const LatticeGeometry& geometry,
                                         double suppress_radius);

struct TrackingStats {
  std::size_t tracked = 0;
  std::size_t good = 0;
  std::size_t retired = 0;
  std::size_t transfers = 0;
  std::size_t collisions = 0;
  std::size_t out_of_view = 0;
  std::size_t hypotheses = 0;
  std::size_t suppressed = 0;
  std::size_t released = 0;
  std::size_t live_after = 0;
};

// Moves a GoodTrack segment to the block holding its midpoint. A collision (target
// block already owns a live segment) or an off-sensor midpoint leaves the segment
// where it is; the caller then retires it.
enum class TransferOutcome { unchanged, moved, collision, out_of_view };
TransferOutcome transfer_admin(LineSegment& seg, LatticeState& state, std::uint64_t now_us,
                               Trace* trace);

// Applies suppression for the given live segments and releases every suppressed
// block no live segment keeps. Returns {suppressed, released} counts.
std::pair<std::size_t, std::size_t> update_suppression(std::span<const LineSegment> live,
                                                       LatticeState& state,
                                                       const LineParams& params,
                                                       std::uint64_t now_us, Trace* trace);

// For each live segment (row-major by admin): track, transfer admin, retire if bad;
// then suppression maintenance over the whole lattice.
TrackingStats tracking_pass(const ScarfStorage& storage, LatticeState& state,
                            const LineParams& params, std::uint64_t now_us,
                            Trace* trace = nullptr);

}  // namespace evline
