#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evline/line_state.hpp"
#include "evline/scarf.hpp"

namespace evline {

// Fits a line to the block's active events, clips it to the block and scores it.
// Returns a Detected segment when the score is strictly above f_th. The caller
// supplies the l_id source; an id is drawn only on success.
std::optional<LineSegment> detect_block(BlockCoord block, const ScarfStorage& storage,
                                        const LineParams& params, LatticeState& state,
                                        std::uint64_t now_us);

// One row-major sweep over the lattice; only NoDetect blocks are examined. New
// segments are installed in `state` and returned.
std::vector<LineSegment> detection_pass(const ScarfStorage& storage, LatticeState& state,
                                        const LineParams& params, std::uint64_t now_us,
                                        Trace* trace = nullptr);

}  // namespace evline
