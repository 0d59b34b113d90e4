#include "evline/events.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace evline {

namespace {

constexpr const char* kEventHeader = "t_us,u,v,p";
constexpr const char* kGroundTruthHeader = "t_us,id,x0,y0,x1,y1";

// Splits a CSV line into exactly `n` fields; returns false on a count mismatch.
bool split_fields(std::string_view line, std::string_view* fields, std::size_t n) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto end = comma == std::string_view::npos ? line.size() : comma;
    if (count == n) return false;
    fields[count++] = line.substr(start, end - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return count == n;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void check_order(std::uint64_t prev, const Event& e, std::size_t record) {
  if (e.t < prev) {
    throw OrderingError("timestamp " + std::to_string(e.t) + " at record " +
                            std::to_string(record) + " precedes " + std::to_string(prev),
                        record);
  }
}

}  // namespace

SensorGeometry::SensorGeometry(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("sensor dimensions must be positive");
}

double SensorGeometry::diagonal() const noexcept {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

EventFormat parse_event_format(const std::string& name) {
  if (name == "csv") return EventFormat::csv;
  if (name == "binary" || name == "bin") return EventFormat::binary;
  throw std::invalid_argument("unknown event format '" + name + "'");
}

Event parse_csv_event(const std::string& line) {
  std::string_view fields[4];
  if (!split_fields(strip_cr(line), fields, 4)) {
    throw ParseError("expected 4 fields in '" + line + "'", 0, 0);
  }
  Event e;
  int u = 0, v = 0, p = 0;
  if (!parse_number(fields[0], e.t)) throw ParseError("bad timestamp in '" + line + "'", 0, 0);
  if (!parse_number(fields[1], u) || u < 0 || u > 0xFFFF ||
      !parse_number(fields[2], v) || v < 0 || v > 0xFFFF) {
    throw ParseError("bad pixel coordinate in '" + line + "'", 0, 0);
  }
  if (!parse_number(fields[3], p) || (p != 1 && p != -1)) {
    throw ParseError("polarity must be 1 or -1 in '" + line + "'", 0, 0);
  }
  e.u = static_cast<std::uint16_t>(u);
  e.v = static_cast<std::uint16_t>(v);
  e.p = static_cast<std::int8_t>(p);
  return e;
}

void encode_binary_event(const Event& e, std::uint8_t* out) noexcept {
  out[0] = static_cast<std::uint8_t>(e.u & 0xFF);
  out[1] = static_cast<std::uint8_t>(e.u >> 8);
  out[2] = static_cast<std::uint8_t>(e.v & 0xFF);
  out[3] = static_cast<std::uint8_t>(e.v >> 8);
  for (int i = 0; i < 8; ++i) out[4 + i] = static_cast<std::uint8_t>((e.t >> (8 * i)) & 0xFF);
  out[12] = static_cast<std::uint8_t>(e.p);
}

Event decode_binary_event(const std::uint8_t* in) {
  Event e;
  e.u = static_cast<std::uint16_t>(in[0] | (in[1] << 8));
  e.v = static_cast<std::uint16_t>(in[2] | (in[3] << 8));
  e.t = 0;
  for (int i = 0; i < 8; ++i) e.t |= static_cast<std::uint64_t>(in[4 + i]) << (8 * i);
  const auto p = static_cast<std::int8_t>(in[12]);
  if (p != 1 && p != -1) throw ParseError("polarity must be 1 or -1", 0, 0);
  e.p = p;
  return e;
}

std::vector<Event> read_events(const std::filesystem::path& path, EventFormat format) {
  std::vector<Event> events;
  std::uint64_t prev = 0;

  if (format == EventFormat::binary) {
    auto in = open_input(path, std::ios::binary);
    const auto size = std::filesystem::file_size(path);
    if (size % kBinaryRecordSize != 0) {
      throw ParseError("truncated binary record at record " +
                           std::to_string(size / kBinaryRecordSize),
                       size / kBinaryRecordSize, 0);
    }
    std::vector<std::uint8_t> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw std::runtime_error("read failure on " + path.string());
    const std::size_t n = size / kBinaryRecordSize;
    events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Event e;
      try {
        e = decode_binary_event(bytes.data() + i * kBinaryRecordSize);
      } catch (const ParseError& err) {
        throw ParseError(std::string(err.what()) + " at record " + std::to_string(i), i, 0);
      }
      check_order(prev, e, i);
      prev = e.t;
      events.push_back(e);
    }
    return events;
  }

  auto in = open_input(path, std::ios::in);
  std::string line;
  std::size_t line_no = 0;
  std::size_t record = 0;
  if (!std::getline(in, line)) return events;
  ++line_no;
  if (strip_cr(line) != kEventHeader) {
    throw ParseError("missing CSV header '" + std::string(kEventHeader) + "'", 0, line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    Event e;
    try {
      e = parse_csv_event(line);
    } catch (const ParseError& err) {
      throw ParseError(std::string(err.what()) + " (line " + std::to_string(line_no) + ")",
                       record, line_no);
    }
    check_order(prev, e, record);
    prev = e.t;
    events.push_back(e);
    ++record;
  }
  return events;
}

void write_events(std::span<const Event> events, const std::filesystem::path& path,
                  EventFormat format) {
  if (format == EventFormat::binary) {
    auto out = open_output(path, std::ios::binary | std::ios::trunc);
    std::vector<std::uint8_t> bytes(events.size() * kBinaryRecordSize);
    for (std::size_t i = 0; i < events.size(); ++i) {
      encode_binary_event(events[i], bytes.data() + i * kBinaryRecordSize);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failure on " + path.string());
    return;
  }

  auto out = open_output(path, std::ios::out | std::ios::trunc);
  std::string buf;
  buf.reserve(events.size() * 20 + 16);
  buf += kEventHeader;
  buf += '\n';
  char tmp[32];
  for (const auto& e : events) {
    auto append = [&](auto value) {
      auto res = std::to_chars(tmp, tmp + sizeof(tmp), value);
      buf.append(tmp, res.ptr);
    };
    append(e.t);
    buf += ',';
    append(static_cast<unsigned>(e.u));
    buf += ',';
    append(static_cast<unsigned>(e.v));
    buf += ',';
    append(static_cast<int>(e.p));
    buf += '\n';
  }
  out << buf;
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

std::vector<GroundTruthSegment> read_ground_truth(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::in);
  std::vector<GroundTruthSegment> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return out;
  ++line_no;
  if (strip_cr(line) != kGroundTruthHeader) {
    throw ParseError("missing ground-truth header", 0, line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (strip_cr(line).empty()) continue;
    std::string_view f[6];
    GroundTruthSegment g;
    if (!split_fields(strip_cr(line), f, 6) || !parse_number(f[0], g.t) ||
        !parse_number(f[1], g.id) || !parse_number(f[2], g.x0) || !parse_number(f[3], g.y0) ||
        !parse_number(f[4], g.x1) || !parse_number(f[5], g.y1)) {
      throw ParseError("malformed ground-truth line " + std::to_string(line_no), out.size(),
                       line_no);
    }
    out.push_back(g);
  }
  return out;
}

void write_ground_truth(std::span<const GroundTruthSegment> segments,
                        const std::filesystem::path& path) {
  auto out = open_output(path, std::ios::out | std::ios::trunc);
  out << kGroundTruthHeader << '\n';
  char buf[256];
  for (const auto& g : segments) {
    std::snprintf(buf, sizeof(buf), "%llu,%u,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(g.t), g.id, g.x0, g.y0, g.x1, g.y1);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace evline
