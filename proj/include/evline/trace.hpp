#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "evline/line_status.hpp"

namespace evline {

// One segment or block state change. Block-only changes (suppression, release,
// transfer-out) carry l_id 0 and zero geometry.
struct TraceRow {
  std::uint64_t t_us = 0;
  std::uint64_t l_id = 0;
  LineStatus status = LineStatus::NoDetect;
  int ru = 0;
  int rv = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double f = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

// Append-only trace shared by the detection and tracking roles.
class Trace {
 public:
  void append(const TraceRow& row) {
    std::lock_guard lock(mutex_);
    rows_.push_back(row);
  }
  void append(std::span<const TraceRow> rows) {
    std::lock_guard lock(mutex_);
    rows_.insert(rows_.end(), rows.begin(), rows.end());
  }
  std::vector<TraceRow> rows() const {
    std::lock_guard lock(mutex_);
    return rows_;
  }
  std::vector<TraceRow> take() {
    std::lock_guard lock(mutex_);
    return std::move(rows_);
  }

 private:
  mutable std::mutex mutex_;
  std::vector<TraceRow> rows_;
};

void write_trace(std::span<const TraceRow> rows, const std::filesystem::path& path);
std::vector<TraceRow> read_trace(const std::filesystem::path& path);
std::string format_trace(std::span<const TraceRow> rows);

// FNV-1a over the CSV text; stable across runs and platforms.
std::uint64_t trace_hash(std::span<const TraceRow> rows);

}  // namespace evline
