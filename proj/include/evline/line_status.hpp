#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace evline {

enum class LineStatus : std::uint8_t { NoDetect, Detected, ProhibitDetection, BadTrack, GoodTrack };

std::string_view to_string(LineStatus s) noexcept;
std::optional<LineStatus> parse_line_status(std::string_view s) noexcept;

constexpr bool is_live(LineStatus s) noexcept {
  return s == LineStatus::Detected || s == LineStatus::GoodTrack;
}

// What caused a block status change.
enum class TransitionCause : std::uint8_t {
  detect,        // NoDetect -> Detected
  track,         // Detected|GoodTrack -> GoodTrack|BadTrack
  retire,        // BadTrack -> NoDetect
  suppress,      // NoDetect -> ProhibitDetection
  release,       // ProhibitDetection -> NoDetect
  transfer_in,   // NoDetect|ProhibitDetection -> GoodTrack (segment moved in)
  transfer_out,  // GoodTrack -> ProhibitDetection (segment moved out)
};

bool legal_transition(LineStatus from, LineStatus to, TransitionCause cause) noexcept;

// Segment-level relation: the status sequence of one l_id.
bool legal_segment_transition(LineStatus from, LineStatus to) noexcept;

}  // namespace evline
