#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "evline/events.hpp"
#include "evline/lattice.hpp"
#include "evline/spin_lock.hpp"

namespace evline {

// Event as held in a block buffer. Timestamps are dropped; only FIFO order remains.
struct StoredEvent {
  std::uint16_t u = 0;
  std::uint16_t v = 0;
  bool active = false;

  friend bool operator==(const StoredEvent&, const StoredEvent&) = default;
};

// Fixed-capacity FIFO: a push into a full buffer evicts the oldest element.
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity);

  void push(StoredEvent e) noexcept {
    data_[head_] = e;
    head_ = head_ + 1 == data_.size() ? 0 : head_ + 1;
    if (size_ < data_.size()) ++size_;
  }

  std::size_t capacity() const noexcept { return data_.size(); }
  std::size_t size() const noexcept { return size_; }

  // Oldest to newest.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::size_t idx = size_ == data_.size() ? head_ : 0;
    for (std::size_t i = 0; i < size_; ++i) {
      fn(data_[idx]);
      idx = idx + 1 == data_.size() ? 0 : idx + 1;
    }
  }
  std::vector<StoredEvent> contents() const;

 private:
  std::vector<StoredEvent> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

enum class SnapshotFilter { active_only, active_and_inactive };

struct Snapshot {
  std::vector<StoredEvent> events;
  std::size_t capacity = 0;  // summed capacity of the requested buffers
};

// N = round(alpha * b^2), at least 1.
std::size_t buffer_capacity(double alpha, int block_size);

// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

inline constexpr int kDefaultIntensity = 64;

// Lattice of per-block ring buffers. One writer (insert) and any number of readers
// (snapshot); each block has its own lock and no operation holds a global lock.
class ScarfStorage {
 public:
  ScarfStorage(const LatticeGeometry& geometry, double alpha);

  ScarfStorage(const ScarfStorage&) = delete;
  ScarfStorage& operator=(const ScarfStorage&) = delete;

  const LatticeGeometry& geometry() const noexcept { return geometry_; }
  std::size_t block_capacity() const noexcept { return capacity_; }
  double alpha() const noexcept { return alpha_; }

  // Pushes the event as active into its block and as inactive into up to three
  // neighbours. Out-of-bounds events are counted and dropped.
  void insert(const Event& e) noexcept;
  void insert(std::span<const Event> events) noexcept;

  // Raw push into one block; used to replay per-block sequences.
  void push(BlockCoord block, StoredEvent e);

  // Point-in-time copy of the requested blocks, locked in row-major order.
  Snapshot snapshot(std::span<const BlockCoord> blocks, SnapshotFilter filter) const;
  void snapshot_into(std::span<const BlockCoord> blocks, SnapshotFilter filter,
                     Snapshot& out) const;
  Snapshot snapshot(BlockCoord block, SnapshotFilter filter) const;

  std::size_t occupancy(BlockCoord block) const;

  GrayImage render_frame(int intensity = kDefaultIntensity) const;

  std::uint64_t rejected() const noexcept { return rejected_.load(std::memory_order_relaxed); }
  std::uint64_t inserted() const noexcept { return inserted_.load(std::memory_order_relaxed); }

 private:
  struct alignas(64) Block {
    explicit Block(std::size_t capacity) : buffer(capacity) {}
    mutable SpinLock lock;
    RingBuffer buffer;
  };

  void push_index(std::size_t index, StoredEvent e) noexcept {
    Block& blk = *blocks_[index];
    blk.lock.lock();
    blk.buffer.push(e);
    blk.lock.unlock();
  }

  LatticeGeometry geometry_;
  double alpha_;
  std::size_t capacity_;
  std::vector<std::unique_ptr<Block>> blocks_;
  std::atomic<std::uint64_t> rejected_{0};
  std::atomic<std::uint64_t> inserted_{0};
};

}  // namespace evline
