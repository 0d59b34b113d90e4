#include "evline/scarf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace evline {

RingBuffer::RingBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ring buffer capacity must be >= 1");
}

std::vector<StoredEvent> RingBuffer::contents() const {
  std::vector<StoredEvent> out;
  out.reserve(size_);
  for_each([&](const StoredEvent& e) { out.push_back(e); });
  return out;
}

std::size_t buffer_capacity(double alpha, int block_size) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const auto n = std::llround(alpha * block_size * block_size);
  return static_cast<std::size_t>(std::max<long long>(1, n));
}

ScarfStorage::ScarfStorage(const LatticeGeometry& geometry, double alpha)
    : geometry_(geometry), alpha_(alpha), capacity_(buffer_capacity(alpha, geometry.block_size())) {
  blocks_.reserve(geometry_.block_count());
  for (std::size_t i = 0; i < geometry_.block_count(); ++i) {
    blocks_.push_back(std::make_unique<Block>(capacity_));
  }
}

void ScarfStorage::insert(const Event& e) noexcept {
  const int u = e.u;
  const int v = e.v;
  if (!geometry_.sensor().contains(u, v)) {
    rejected_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  push_index(geometry_.active_index_unchecked(u, v), {e.u, e.v, true});
  for (const BlockCoord& c : geometry_.inactive_blocks_unchecked(u, v)) {
    push_index(geometry_.index(c), {e.u, e.v, false});
  }
  inserted_.store(inserted_.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
}

void ScarfStorage::insert(std::span<const Event> events) noexcept {
  for (const auto& e : events) insert(e);
}

void ScarfStorage::push(BlockCoord block, StoredEvent e) {
  if (!geometry_.valid(block)) throw std::out_of_range("block outside lattice");
  push_index(geometry_.index(block), e);
}

void ScarfStorage::snapshot_into(std::span<const BlockCoord> blocks, SnapshotFilter filter,
                                 Snapshot& out) const {
  out.events.clear();
  out.capacity = 0;
  // Canonical order; duplicates are only locked and counted once.
  std::vector<std::size_t> order;
  order.reserve(blocks.size());
  for (const auto& c : blocks) {
    if (!geometry_.valid(c)) throw std::out_of_range("block outside lattice");
    order.push_back(geometry_.index(c));
  }
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  for (std::size_t idx : order) blocks_[idx]->lock.lock();
  for (std::size_t idx : order) {
    const RingBuffer& buf = blocks_[idx]->buffer;
    out.capacity += buf.capacity();
    if (filter == SnapshotFilter::active_only) {
      buf.for_each([&](const StoredEvent& e) {
        if (e.active) out.events.push_back(e);
      });
    } else {
      buf.for_each([&](const StoredEvent& e) { out.events.push_back(e); });
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) blocks_[*it]->lock.unlock();
}

Snapshot ScarfStorage::snapshot(std::span<const BlockCoord> blocks, SnapshotFilter filter) const {
  Snapshot out;
  snapshot_into(blocks, filter, out);
  return out;
}

Snapshot ScarfStorage::snapshot(BlockCoord block, SnapshotFilter filter) const {
  return snapshot(std::span<const BlockCoord>(&block, 1), filter);
}

std::size_t ScarfStorage::occupancy(BlockCoord block) const {
  if (!geometry_.valid(block)) throw std::out_of_range("block outside lattice");
  const Block& blk = *blocks_[geometry_.index(block)];
  blk.lock.lock();
  const auto n = blk.buffer.size();
  blk.lock.unlock();
  return n;
}

GrayImage ScarfStorage::render_frame(int intensity) const {
  const auto& s = geometry_.sensor();
  GrayImage img{s.width, s.height,
                std::vector<std::uint8_t>(static_cast<std::size_t>(s.width) * s.height, 0)};
  for (const auto& blk : blocks_) {
    blk->lock.lock();
    blk->buffer.for_each([&](const StoredEvent& e) {
      if (!e.active) return;
      auto& px = img.pixels[static_cast<std::size_t>(e.v) * s.width + e.u];
      px = static_cast<std::uint8_t>(std::min(255, px + intensity));
    });
    blk->lock.unlock();
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width <= 0 || img.height <= 0) {
    throw std::runtime_error("unsupported PGM " + path.string());
  }
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw std::runtime_error("truncated PGM " + path.string());
  return img;
}

}  // namespace evline
