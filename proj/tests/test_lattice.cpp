#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "evline/lattice.hpp"

using namespace evline;

namespace {

std::set<BlockCoord> as_set(const InactiveSet& s) { return {s.begin(), s.end()}; }
std::set<BlockCoord> as_set(const std::vector<BlockCoord>& v) { return {v.begin(), v.end()}; }

const LatticeGeometry kGeo(SensorGeometry(240, 180), 8);

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("block counts cover the sensor") {
    CHECK(kGeo.nx() == 30);
    CHECK(kGeo.ny() == 23);
    const LatticeGeometry odd(SensorGeometry(346, 260), 10);
    CHECK(odd.nx() == 35);
    CHECK(odd.ny() == 26);
    CHECK_THROWS(LatticeGeometry(SensorGeometry(240, 180), 7));
    CHECK_THROWS(LatticeGeometry(SensorGeometry(240, 180), 0));
  }

  TEST_CASE("active block is the floor division") {
    CHECK(kGeo.active_block_of(0, 0) == BlockCoord{0, 0});
    CHECK(kGeo.active_block_of(7, 7) == BlockCoord{0, 0});
    CHECK(kGeo.active_block_of(8, 8) == BlockCoord{1, 1});
    CHECK(kGeo.active_block_of(239, 179) == BlockCoord{29, 22});
    CHECK_THROWS_AS(kGeo.active_block_of(240, 0), std::out_of_range);
    CHECK_THROWS_AS(kGeo.active_block_of(-1, 0), std::out_of_range);
  }

  TEST_CASE("inactive neighbours near a corner") {
    CHECK(as_set(kGeo.inactive_blocks_of(9, 9)) ==
          std::set<BlockCoord>{{0, 1}, {1, 0}, {0, 0}});
  }

  TEST_CASE("block centre on the lattice corner has no inactive neighbours") {
    CHECK(kGeo.inactive_blocks_of(4, 4).empty());
  }

  TEST_CASE("exactly half a block from a border is not inactive there") {
    CHECK(kGeo.inactive_blocks_of(12, 4).empty());
    CHECK(as_set(kGeo.inactive_blocks_of(11, 4)) == std::set<BlockCoord>{{0, 0}});
    CHECK(as_set(kGeo.inactive_blocks_of(13, 12)) == std::set<BlockCoord>{{2, 1}});
  }

  TEST_CASE("every pixel has one active block and at most three inactive ones") {
    for (int v = 0; v < 180; ++v) {
      for (int u = 0; u < 240; ++u) {
        const auto own = kGeo.active_block_of(u, v);
        const auto inactive = kGeo.inactive_blocks_of(u, v);
        REQUIRE(inactive.size() <= 3);
        for (const auto& c : inactive) {
          REQUIRE(kGeo.valid(c));
          REQUIRE(c != own);
        }
      }
    }
  }

  TEST_CASE("segment inside one block") {
    CHECK(as_set(kGeo.blocks_crossed({2, 2}, {6, 6})) == std::set<BlockCoord>{{0, 0}});
  }

  TEST_CASE("segment crossing a vertical border") {
    CHECK(as_set(kGeo.blocks_crossed({4, 4}, {12, 4})) == std::set<BlockCoord>{{0, 0}, {1, 0}});
  }

  TEST_CASE("segment through a lattice corner includes both edge neighbours") {
    CHECK(as_set(kGeo.blocks_crossed({7.5, 7.5}, {8.5, 8.5})) ==
          std::set<BlockCoord>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  }

  TEST_CASE("blocks_crossed is symmetric and small for short segments") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0, 240), uy(0, 180), ang(0, 6.283185307179586),
        len(0.1, 7.9);
    for (int i = 0; i < 2000; ++i) {
      const Vec2 a{ux(rng), uy(rng)};
      const double th = ang(rng), l = len(rng);
      Vec2 b{a.x + l * std::cos(th), a.y + l * std::sin(th)};
      b.x = std::clamp(b.x, 0.0, 240.0);
      b.y = std::clamp(b.y, 0.0, 180.0);
      const auto fwd = as_set(kGeo.blocks_crossed(a, b));
      REQUIRE(fwd == as_set(kGeo.blocks_crossed(b, a)));
      REQUIRE(fwd.size() <= 4);
      REQUIRE(fwd.count(*kGeo.block_at((a + b) * 0.5)) == 1);
    }
  }

  TEST_CASE("blocks_crossed matches dense sampling on generic segments") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.01, 239.99), uy(0.01, 179.99);
    for (int i = 0; i < 300; ++i) {
      const Vec2 a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
      std::set<BlockCoord> sampled;
      const int steps = 20000;
      for (int k = 0; k <= steps; ++k) {
        const Vec2 p = lerp(a, b, static_cast<double>(k) / steps);
        sampled.insert({static_cast<int>(p.x / 8), static_cast<int>(p.y / 8)});
      }
      const auto crossed = as_set(kGeo.blocks_crossed(a, b));
      // Sampling can only miss blocks, never invent them.
      for (const auto& c : sampled) REQUIRE(crossed.count(c) == 1);
    }
  }

  TEST_CASE("active rect of a partial border block is clipped") {
    const LatticeGeometry g(SensorGeometry(346, 260), 10);
    const Rect r = g.active_rect({34, 25});
    CHECK(r.x0 == 340);
    CHECK(r.x1 == 346);
    CHECK(r.y0 == 250);
    CHECK(r.y1 == 260);
  }
}
