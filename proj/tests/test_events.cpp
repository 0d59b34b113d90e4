#include <doctest.h>

#include <array>
#include <fstream>
#include <random>

#include "evline/events.hpp"
#include "test_util.hpp"

using namespace evline;

namespace {

std::vector<Event> random_stream(std::mt19937_64& rng, std::size_t n) {
  std::vector<Event> out;
  std::uint64_t t = rng() % 1000;
  for (std::size_t i = 0; i < n; ++i) {
    t += rng() % 50;
    out.push_back({t, static_cast<std::uint16_t>(rng() % 640), static_cast<std::uint16_t>(rng() % 480),
                   static_cast<std::int8_t>(rng() % 2 ? 1 : -1)});
  }
  return out;
}

}  // namespace

TEST_SUITE("events") {
  TEST_CASE("csv line parses into an event") {
    const Event e = parse_csv_event("1000,5,7,1");
    CHECK(e == Event{1000, 5, 7, 1});
    CHECK(parse_csv_event("3,0,0,-1").p == -1);
  }

  TEST_CASE("csv polarity outside +-1 is rejected") {
    CHECK_THROWS_AS(parse_csv_event("1000,5,7,2"), ParseError);
    CHECK_THROWS_AS(parse_csv_event("1000,5,7,0"), ParseError);
    CHECK_THROWS_AS(parse_csv_event("1000,5,7"), ParseError);
    CHECK_THROWS_AS(parse_csv_event("x,5,7,1"), ParseError);
  }

  TEST_CASE("binary record decodes little-endian fields") {
    std::array<std::uint8_t, kBinaryRecordSize> rec{};
    rec[0] = 5;                     // u
    rec[2] = 7;                     // v
    rec[4] = 1000 & 0xff;           // t
    rec[5] = (1000 >> 8) & 0xff;
    rec[12] = 0xff;                 // p = -1
    CHECK(decode_binary_event(rec.data()) == Event{1000, 5, 7, -1});

    std::array<std::uint8_t, kBinaryRecordSize> back{};
    encode_binary_event({1000, 5, 7, -1}, back.data());
    CHECK(back == rec);
  }

  TEST_CASE("empty stream writes a header-only csv") {
    testutil::TempDir dir("events");
    const auto path = dir / "empty.csv";
    write_events({}, path, EventFormat::csv);
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all == "t_us,u,v,p\n");
    CHECK(read_events(path, EventFormat::csv).empty());
  }

  TEST_CASE("three events round-trip in both formats") {
    const std::vector<Event> three{{1, 2, 3, 1}, {1, 4, 5, -1}, {9, 239, 179, 1}};
    testutil::TempDir dir("events");
    for (auto fmt : {EventFormat::csv, EventFormat::binary}) {
      const auto path = dir / (fmt == EventFormat::csv ? "a.csv" : "a.bin");
      write_events(three, path, fmt);
      CHECK(read_events(path, fmt) == three);
    }
  }

  TEST_CASE("random streams round-trip in both formats") {
    std::mt19937_64 rng(7);
    testutil::TempDir dir("events");
    for (int trial = 0; trial < 20; ++trial) {
      const auto stream = random_stream(rng, rng() % 500);
      for (auto fmt : {EventFormat::csv, EventFormat::binary}) {
        const auto path = dir / "r.dat";
        write_events(stream, path, fmt);
        REQUIRE(read_events(path, fmt) == stream);
      }
    }
  }

  TEST_CASE("decreasing timestamps are reported with the record index") {
    testutil::TempDir dir("events");
    const auto path = dir / "bad.csv";
    {
      std::ofstream out(path);
      out << "t_us,u,v,p\n10,1,1,1\n20,1,1,1\n15,1,1,1\n";
    }
    try {
      read_events(path, EventFormat::csv);
      FAIL("expected an ordering error");
    } catch (const OrderingError& e) {
      CHECK(e.record() == 2);
    }
  }

  TEST_CASE("malformed csv record reports its line") {
    testutil::TempDir dir("events");
    const auto path = dir / "bad.csv";
    {
      std::ofstream out(path);
      out << "t_us,u,v,p\n10,1,1,1\n11,1,1,3\n";
    }
    try {
      read_events(path, EventFormat::csv);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.record() == 1);
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("truncated binary file is rejected") {
    testutil::TempDir dir("events");
    const auto path = dir / "short.bin";
    {
      std::ofstream out(path, std::ios::binary);
      out.write("abcdefg", 7);
    }
    CHECK_THROWS_AS(read_events(path, EventFormat::binary), ParseError);
  }

  TEST_CASE("ground truth round-trips") {
    const std::vector<GroundTruthSegment> gt{{0, 1, 10.5, 0, 10.5, 179}, {1000, 1, 11.25, 0, 11.25, 179}};
    testutil::TempDir dir("events");
    write_ground_truth(gt, dir / "gt.csv");
    CHECK(read_ground_truth(dir / "gt.csv") == gt);
  }
}
