#include <doctest.h>

#include <cmath>
#include <random>

#include "evline/linefit.hpp"
#include "oracles.hpp"

using namespace evline;

namespace {

StoredEvent at(double u, double v, bool active = true) {
  return {static_cast<std::uint16_t>(u), static_cast<std::uint16_t>(v), active};
}

// Score helper working on fractional coordinates through a shifted candidate:
// events sit on integer pixels, so shift the candidate by -0.5 instead.
Candidate shifted(Vec2 a, Vec2 b, double dx) { return {{a.x + dx, a.y}, {b.x + dx, b.y}}; }

double sq_residual(std::span<const Vec2> pts, Vec2 p, Vec2 d) {
  double s = 0;
  for (const auto& q : pts) {
    const double c = cross(q - p, d);
    s += c * c;
  }
  return s;
}

}  // namespace

TEST_SUITE("linefit") {
  TEST_CASE("distances") {
    auto d = distances({2, 3}, {{0, 0}, {4, 0}});
    CHECK(d.d1 == doctest::Approx(3));
    CHECK(d.d2 == doctest::Approx(2));
    d = distances({0, 0}, {{0, 0}, {4, 0}});
    CHECK(d.d1 == 0);
    CHECK(d.d2 == 0);
    d = distances({3, 4}, {{0, 0}, {3, 4}});
    CHECK(d.d1 == doctest::Approx(0).epsilon(1e-12));
    CHECK(d.d2 == doctest::Approx(5));
    CHECK(distances({1, -2}, {{0, 0}, {4, 0}}).d1 == doctest::Approx(2));
    CHECK(distances({-1, 0}, {{0, 0}, {4, 0}}).d2 == doctest::Approx(-1));
    CHECK_THROWS_AS(distances({1, 1}, {{2, 2}, {2, 2}}), std::invalid_argument);
  }

  TEST_CASE("occupancy ratio token enumeration") {
    const ScoreParams p{1.6, 64, 8};
    // Events at pixel (k, 0) seen from a candidate shifted by -0.5 sit at d2 = k + 0.5.
    const Candidate c = shifted({0, 0}, {8, 0}, -0.5);
    std::vector<StoredEvent> all, half;
    for (int k = 0; k < 8; ++k) all.push_back(at(k, 0));
    for (int k = 0; k < 4; ++k) half.push_back(at(k, 0));
    CHECK(occupancy_ratio({}, c, p) == 0);
    CHECK(occupancy_ratio(all, c, p) == doctest::Approx(1.0));
    CHECK(occupancy_ratio(half, c, p) == doctest::Approx(0.5));
  }

  TEST_CASE("occupancy ignores events behind q0, past q1, or too far") {
    const ScoreParams p{1.6, 64, 8};
    const Candidate c{{0, 0}, {8, 0}};
    CHECK(occupancy_ratio(std::vector{at(9, 0)}, c, p) == 0);
    CHECK(occupancy_ratio(std::vector{at(8, 0)}, c, p) == 0);      // d2 == length
    CHECK(occupancy_ratio(std::vector{at(3, 2)}, c, p) == 0);      // d1 = 2 >= 1.6
    CHECK(occupancy_ratio(std::vector{at(0, 0)}, c, p) == doctest::Approx(1.0 / 8));
    // Inactive events still mark tokens.
    CHECK(occupancy_ratio(std::vector{at(2, 1, false)}, c, p) == doctest::Approx(1.0 / 8));
  }

  TEST_CASE("effective ratio counts near active events over capacity") {
    const ScoreParams p{1.6, 64, 8};
    const Candidate c{{0, 4}, {8, 4}};
    CHECK(effective_ratio({}, c, p) == 0);
    std::vector<StoredEvent> eight;
    for (int k = 0; k < 8; ++k) eight.push_back(at(k, 4));
    CHECK(effective_ratio(eight, c, p) == doctest::Approx(0.125));
    std::vector<StoredEvent> full;
    for (int k = 0; k < 64; ++k) full.push_back(at(k % 8, 4));
    CHECK(effective_ratio(full, c, p) == doctest::Approx(1.0));
    // Inactive and far events do not count; events behind q0 do.
    CHECK(effective_ratio(std::vector{at(3, 4, false), at(3, 7), at(20, 4)}, c, p) ==
          doctest::Approx(1.0 / 64));
  }

  TEST_CASE("fitting score is the product of the ratios") {
    const ScoreParams p{1.6, 64, 8};
    const Candidate c = shifted({0, 4}, {8, 4}, -0.5);
    CHECK(fitting_score({}, c, p).f == 0);
    std::vector<StoredEvent> full, sparse;
    for (int k = 0; k < 64; ++k) full.push_back(at(k % 8, 4));
    for (int k = 0; k < 8; ++k) sparse.push_back(at(k, 4));
    CHECK(fitting_score(full, c, p).f == doctest::Approx(1.0));
    const Score s = fitting_score(sparse, c, p);
    CHECK(s.occupancy == doctest::Approx(1.0));
    CHECK(s.effective == doctest::Approx(0.125));
    CHECK(s.f == doctest::Approx(0.125));
  }

  TEST_CASE("score matches the brute-force oracle on random inputs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> coord(-2, 26), dmax(0.2, 4.0);
    for (int i = 0; i < 2000; ++i) {
      std::vector<StoredEvent> ev(rng() % 200);
      for (auto& e : ev) e = {static_cast<std::uint16_t>(rng() % 24), static_cast<std::uint16_t>(rng() % 24), rng() % 3 != 0};
      Candidate c{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}};
      if (c.length() < 1e-3) continue;
      const ScoreParams p{dmax(rng), ev.size() + rng() % 100 + 1, 8};
      const Score s = fitting_score(ev, c, p);
      const auto o = oracle::brute_force_score(ev, c.q0, c.q1, p.d_max, p.capacity);
      REQUIRE(std::abs(s.occupancy - o.r_o) <= 1e-9);
      REQUIRE(std::abs(s.effective - o.r_e) <= 1e-9);
      REQUIRE(std::abs(s.f - o.f) <= 1e-9);
      REQUIRE(s.f >= 0);
      REQUIRE(s.f <= 1);
    }
  }

  TEST_CASE("adding a near active event never lowers the score parts") {
    std::mt19937_64 rng(4);
    const ScoreParams p{1.6, 64, 8};
    const Candidate c{{0.3, 0.2}, {7.7, 6.1}};
    std::vector<StoredEvent> ev;
    double last_tokens = 0, last_e = 0;
    for (int i = 0; i < 60; ++i) {
      StoredEvent e{static_cast<std::uint16_t>(rng() % 8), static_cast<std::uint16_t>(rng() % 8), true};
      if (distances({double(e.u), double(e.v)}, c).d1 >= p.d_max) continue;
      ev.push_back(e);
      const Score s = fitting_score(ev, c, p);
      CHECK(s.occupancy >= last_tokens);
      CHECK(s.effective > last_e);
      last_tokens = s.occupancy;
      last_e = s.effective;
    }
  }

  TEST_CASE("fit_line on collinear points") {
    const std::vector<Vec2> row{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    auto l = fit_line(std::span<const Vec2>(row));
    REQUIRE(l);
    CHECK(l->point.y == doctest::Approx(0));
    CHECK(std::abs(l->direction.x) == doctest::Approx(1));
    CHECK(l->direction.y == doctest::Approx(0).epsilon(1e-12));

    const std::vector<Vec2> diag{{0, 0}, {1, 1}, {2, 2}};
    l = fit_line(std::span<const Vec2>(diag));
    REQUIRE(l);
    CHECK(l->point.x == doctest::Approx(1));
    CHECK(l->point.y == doctest::Approx(1));
    CHECK(l->direction.x == doctest::Approx(std::sqrt(0.5)));
    CHECK(l->direction.y == doctest::Approx(std::sqrt(0.5)));
  }

  TEST_CASE("fit_line rejects isotropic and coincident clouds") {
    const std::vector<Vec2> square{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK_FALSE(fit_line(std::span<const Vec2>(square)));
    const std::vector<Vec2> same{{2, 2}, {2, 2}, {2, 2}};
    CHECK_FALSE(fit_line(std::span<const Vec2>(same)));
    CHECK_FALSE(fit_line(std::span<const Vec2>()));
  }

  TEST_CASE("fit_line beats random lines through the centroid") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0, 0.7);
    std::uniform_real_distribution<double> uni(0, 8), ang(0, 3.141592653589793);
    for (int trial = 0; trial < 50; ++trial) {
      const double th = ang(rng);
      std::vector<Vec2> pts;
      for (int i = 0; i < 30; ++i) {
        const double s = uni(rng) - 4;
        pts.push_back({4 + s * std::cos(th) + noise(rng), 4 + s * std::sin(th) + noise(rng)});
      }
      const auto l = fit_line(std::span<const Vec2>(pts));
      if (!l) continue;
      const double best = sq_residual(pts, l->point, l->direction);
      for (int k = 0; k < 1000; ++k) {
        const double a = ang(rng);
        REQUIRE(best <= sq_residual(pts, l->point, {std::cos(a), std::sin(a)}) + 1e-9);
      }
    }
  }

  TEST_CASE("clip_to_block") {
    const Rect r{0, 0, 8, 8};
    auto c = clip_to_block({{3, 4}, {1, 0}}, r);
    REQUIRE(c);
    CHECK(c->q0 == Vec2{0, 4});
    CHECK(c->q1 == Vec2{8, 4});

    c = clip_to_block({{2, 2}, {-std::sqrt(0.5), -std::sqrt(0.5)}}, r);
    REQUIRE(c);
    CHECK(c->q0.x == doctest::Approx(0));
    CHECK(c->q0.y == doctest::Approx(0));
    CHECK(c->q1.x == doctest::Approx(8));
    CHECK(c->q1.y == doctest::Approx(8));
    CHECK(c->length() == doctest::Approx(8 * std::sqrt(2.0)));

    CHECK_FALSE(clip_to_block({{0, 100}, {std::sqrt(0.5), std::sqrt(0.5)}}, r));
    // Grazing a single corner.
    CHECK_FALSE(clip_to_block({{0, 16}, {std::sqrt(0.5), -std::sqrt(0.5)}}, r));
  }

  TEST_CASE("clipped endpoints lie on the rectangle boundary") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> in(0, 8), ang(0, 6.283185307179586);
    const Rect r{16, 8, 24, 16};
    auto on_boundary = [&](Vec2 p) {
      const double dx = std::min(std::abs(p.x - r.x0), std::abs(p.x - r.x1));
      const double dy = std::min(std::abs(p.y - r.y0), std::abs(p.y - r.y1));
      const bool inside = p.x >= r.x0 - 1e-9 && p.x <= r.x1 + 1e-9 && p.y >= r.y0 - 1e-9 && p.y <= r.y1 + 1e-9;
      return inside && std::min(dx, dy) <= 1e-9;
    };
    for (int i = 0; i < 5000; ++i) {
      const double a = ang(rng);
      const auto c = clip_to_block({{16 + in(rng), 8 + in(rng)}, {std::cos(a), std::sin(a)}}, r);
      REQUIRE(c);
      REQUIRE(on_boundary(c->q0));
      REQUIRE(on_boundary(c->q1));
      REQUIRE((c->q0.x < c->q1.x || (c->q0.x == c->q1.x && c->q0.y <= c->q1.y)));
    }
  }
}
