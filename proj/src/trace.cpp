#include "evline/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>

namespace evline {

namespace {

constexpr const char* kTraceHeader = "t_us,l_id,status,ru,rv,x0,y0,x1,y1,f";

void append_row(std::string& out, const TraceRow& r) {
  char buf[320];
  const auto status = to_string(r.status);
  const int n = std::snprintf(buf, sizeof(buf), "%llu,%llu,%.*s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              static_cast<unsigned long long>(r.t_us),
                              static_cast<unsigned long long>(r.l_id),
                              static_cast<int>(status.size()), status.data(), r.ru, r.rv, r.x0,
                              r.y0, r.x1, r.y1, r.f);
  out.append(buf, static_cast<std::size_t>(n));
}

template <typename T>
bool parse_field(std::string_view s, T& out) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return !s.empty() && res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

std::string format_trace(std::span<const TraceRow> rows) {
  std::string out = kTraceHeader;
  out += '\n';
  out.reserve(out.size() + rows.size() * 96);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

void write_trace(std::span<const TraceRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_trace(rows);
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TraceRow> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return rows;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error("missing trace header in " + path.string());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::string_view fields[10];
    std::size_t count = 0;
    std::string_view rest(line);
    while (count < 10) {
      const auto comma = rest.find(',');
      fields[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    TraceRow r;
    std::string_view status = fields[2];
    const auto parsed_status = parse_line_status(status);
    if (count != 10 || !parse_field(fields[0], r.t_us) || !parse_field(fields[1], r.l_id) ||
        !parsed_status || !parse_field(fields[3], r.ru) || !parse_field(fields[4], r.rv) ||
        !parse_field(fields[5], r.x0) || !parse_field(fields[6], r.y0) ||
        !parse_field(fields[7], r.x1) || !parse_field(fields[8], r.y1) ||
        !parse_field(fields[9], r.f)) {
      throw std::runtime_error("malformed trace line " + std::to_string(line_no) + " in " +
                               path.string());
    }
    r.status = *parsed_status;
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t trace_hash(std::span<const TraceRow> rows) {
  const std::string text = format_trace(rows);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace evline
