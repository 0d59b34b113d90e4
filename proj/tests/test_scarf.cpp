#include <doctest.h>

#include <random>
#include <thread>

#include "evline/scarf.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace evline;

namespace {

const LatticeGeometry kGeo(SensorGeometry(240, 180), 8);

StoredEvent active(int u, int v) {
  return {static_cast<std::uint16_t>(u), static_cast<std::uint16_t>(v), true};
}

}  // namespace

TEST_SUITE("scarf") {
  TEST_CASE("capacity is round(alpha b^2), at least one") {
    CHECK(buffer_capacity(1.0, 8) == 64);
    CHECK(buffer_capacity(0.5, 10) == 50);
    CHECK(buffer_capacity(0.3, 3) == 3);
    CHECK(buffer_capacity(0.001, 2) == 1);
  }

  TEST_CASE("ring buffer keeps insertion order and evicts the oldest") {
    RingBuffer rb(4);
    for (int i = 0; i < 4; ++i) rb.push(active(i, 0));
    CHECK(rb.size() == 4);
    CHECK(rb.contents() == std::vector<StoredEvent>{active(0, 0), active(1, 0), active(2, 0), active(3, 0)});
    rb.push(active(4, 0));
    CHECK(rb.size() == 4);
    CHECK(rb.contents() == std::vector<StoredEvent>{active(1, 0), active(2, 0), active(3, 0), active(4, 0)});
  }

  TEST_CASE("event near a corner is active once and inactive three times") {
    ScarfStorage s(kGeo, 1.0);
    s.insert(Event{0, 9, 9, 1});
    CHECK(s.occupancy({1, 1}) == 1);
    CHECK(s.snapshot(BlockCoord{1, 1}, SnapshotFilter::active_only).events.size() == 1);
    for (BlockCoord c : {BlockCoord{0, 1}, BlockCoord{1, 0}, BlockCoord{0, 0}}) {
      CHECK(s.occupancy(c) == 1);
      CHECK(s.snapshot(c, SnapshotFilter::active_only).events.empty());
      CHECK(s.snapshot(c, SnapshotFilter::active_and_inactive).events.size() == 1);
    }
  }

  TEST_CASE("snapshot of empty storage reports summed capacity") {
    ScarfStorage s(kGeo, 1.0);
    const std::vector<BlockCoord> blocks{{0, 0}, {1, 0}, {2, 0}};
    const Snapshot snap = s.snapshot(blocks, SnapshotFilter::active_only);
    CHECK(snap.events.empty());
    CHECK(snap.capacity == 3 * 64);
  }

  TEST_CASE("filter drops inactive events") {
    ScarfStorage s(kGeo, 1.0);
    for (int i = 0; i < 3; ++i) s.push({1, 1}, active(9 + i, 9));
    for (int i = 0; i < 2; ++i) s.push({1, 1}, {static_cast<std::uint16_t>(17), static_cast<std::uint16_t>(9 + i), false});
    CHECK(s.snapshot(BlockCoord{1, 1}, SnapshotFilter::active_only).events.size() == 3);
    CHECK(s.snapshot(BlockCoord{1, 1}, SnapshotFilter::active_and_inactive).events.size() == 5);
  }

  TEST_CASE("border event appears twice with inactive and once without") {
    ScarfStorage s(kGeo, 1.0);
    s.insert(Event{0, 8, 4, 1});  // active in (1,0), inactive in (0,0)
    const std::vector<BlockCoord> both{{0, 0}, {1, 0}};
    CHECK(s.snapshot(both, SnapshotFilter::active_and_inactive).events.size() == 2);
    CHECK(s.snapshot(both, SnapshotFilter::active_only).events.size() == 1);
  }

  TEST_CASE("out-of-bounds events are counted and dropped") {
    ScarfStorage s(kGeo, 1.0);
    s.insert(Event{0, 240, 0, 1});
    s.insert(Event{0, 0, 180, 1});
    s.insert(Event{0, 3, 3, 1});
    CHECK(s.rejected() == 2);
    CHECK(s.inserted() == 1);
  }

  TEST_CASE("random insertion sequences match the last-N oracle") {
    const LatticeGeometry small(SensorGeometry(40, 32), 8);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      const double alpha = trial % 2 ? 1.0 : 0.1;
      ScarfStorage s(small, alpha);
      oracle::FifoModel model(small, s.block_capacity());
      const int n = static_cast<int>(rng() % 400);
      for (int i = 0; i < n; ++i) {
        const int u = static_cast<int>(rng() % 40), v = static_cast<int>(rng() % 32);
        s.insert(Event{static_cast<std::uint64_t>(i), static_cast<std::uint16_t>(u),
                       static_cast<std::uint16_t>(v), 1});
        model.insert(u, v);
      }
      for (std::size_t i = 0; i < small.block_count(); ++i) {
        const BlockCoord c = small.coord(i);
        REQUIRE(s.occupancy(c) <= s.block_capacity());
        REQUIRE(s.snapshot(c, SnapshotFilter::active_and_inactive).events == model.expected(c, false));
        REQUIRE(s.snapshot(c, SnapshotFilter::active_only).events == model.expected(c, true));
      }
    }
  }

  TEST_CASE("an edge that leaves the region is flushed by later pushes") {
    ScarfStorage s(kGeo, 1.0);
    for (int v = 0; v < 8; ++v) s.insert(Event{0, 3, static_cast<std::uint16_t>(v), 1});
    CHECK(s.snapshot(BlockCoord{0, 0}, SnapshotFilter::active_only).events.size() == 8);
    // The edge moves into the right neighbour; (0,0) now only receives inactive copies.
    for (int k = 0; k < 8; ++k) {
      for (int v = 0; v < 8; ++v) s.insert(Event{1, 9, static_cast<std::uint16_t>(v), 1});
    }
    CHECK(s.snapshot(BlockCoord{0, 0}, SnapshotFilter::active_only).events.empty());
    CHECK(s.occupancy({0, 0}) == 64);
  }

  TEST_CASE("render accumulates active events with saturation") {
    ScarfStorage s(kGeo, 1.0);
    const GrayImage empty = s.render_frame();
    CHECK(std::all_of(empty.pixels.begin(), empty.pixels.end(), [](auto p) { return p == 0; }));

    s.insert(Event{0, 5, 5, 1});
    const GrayImage one = s.render_frame();
    CHECK(one.at(5, 5) == 64);
    CHECK(std::count(one.pixels.begin(), one.pixels.end(), 0) ==
          static_cast<std::ptrdiff_t>(one.pixels.size() - 1));

    for (int i = 0; i < 4; ++i) s.insert(Event{0, 5, 5, 1});
    CHECK(s.render_frame().at(5, 5) == 255);

    ScarfStorage t(kGeo, 1.0);
    t.insert(Event{0, 9, 9, 1});  // three inactive copies contribute nothing
    CHECK(t.render_frame().at(9, 9) == 64);
  }

  TEST_CASE("pgm round-trip") {
    ScarfStorage s(kGeo, 1.0);
    s.insert(Event{0, 1, 2, 1});
    const GrayImage img = s.render_frame();
    testutil::TempDir dir("scarf");
    write_pgm(img, dir / "f.pgm");
    const GrayImage back = read_pgm(dir / "f.pgm");
    CHECK(back.width == 240);
    CHECK(back.height == 180);
    CHECK(back.pixels == img.pixels);
  }

  TEST_CASE("concurrent writer and readers keep buffers bounded") {
    ScarfStorage s(kGeo, 1.0);
    std::atomic<bool> done{false};
    std::thread writer([&] {
      std::mt19937 rng(1);
      for (int i = 0; i < 200000; ++i) {
        s.insert(Event{static_cast<std::uint64_t>(i), static_cast<std::uint16_t>(rng() % 240),
                       static_cast<std::uint16_t>(rng() % 180), 1});
      }
      done = true;
    });
    std::size_t max_seen = 0;
    const std::vector<BlockCoord> blocks{{3, 3}, {4, 3}, {3, 4}, {4, 4}};
    while (!done) {
      const auto snap = s.snapshot(blocks, SnapshotFilter::active_and_inactive);
      max_seen = std::max(max_seen, snap.events.size());
    }
    writer.join();
    CHECK(max_seen <= 4 * 64);
    CHECK(s.inserted() == 200000);
  }
}
