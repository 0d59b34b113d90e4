#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evline {

// One camera event. Timestamps are microseconds.
struct Event {
  std::uint64_t t = 0;
  std::uint16_t u = 0;
  std::uint16_t v = 0;
  std::int8_t p = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  int width = 0;
  int height = 0;

  SensorGeometry() = default;
  SensorGeometry(int w, int h);

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width && v < height;
  }
  double diagonal() const noexcept;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

struct GroundTruthSegment {
  std::uint64_t t = 0;
  std::uint32_t id = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  friend bool operator==(const GroundTruthSegment&, const GroundTruthSegment&) = default;
};

enum class EventFormat { csv, binary };

EventFormat parse_event_format(const std::string& name);

// Raised for malformed records. `record` is the 0-based data record index
// (CSV header excluded); `line` is the 1-based text line for CSV, 0 for binary.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t record, std::size_t line)
      : std::runtime_error(what), record_(record), line_(line) {}
  std::size_t record() const noexcept { return record_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t record_;
  std::size_t line_;
};

class OrderingError : public std::runtime_error {
 public:
  OrderingError(const std::string& what, std::size_t record)
      : std::runtime_error(what), record_(record) {}
  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

// Size of one packed binary record: u16 u, u16 v, u64 t, i8 p (little-endian).
inline constexpr std::size_t kBinaryRecordSize = 13;

Event parse_csv_event(const std::string& line);
std::vector<Event> read_events(const std::filesystem::path& path, EventFormat format);
void write_events(std::span<const Event> events, const std::filesystem::path& path,
                  EventFormat format);

std::vector<GroundTruthSegment> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(std::span<const GroundTruthSegment> segments,
                        const std::filesystem::path& path);

void encode_binary_event(const Event& e, std::uint8_t* out) noexcept;
Event decode_binary_event(const std::uint8_t* in);

}  // namespace evline
