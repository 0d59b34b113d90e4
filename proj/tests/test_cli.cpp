#include <doctest.h>

#include <fstream>
#include <sstream>

#include "evline/cli.hpp"
#include "evline/events.hpp"
#include "evline/scarf.hpp"
#include "evline/scene.hpp"
#include "evline/trace.hpp"
#include "test_util.hpp"

using namespace evline;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"run", "--events", "x.csv", "--no-such-flag"}).code == 2);
    CHECK(cli({"run", "--events", "x.csv", "--mode", "sideways"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("gen writes events and ground truth") {
    testutil::TempDir dir("cli");
    write_text(dir / "spec.json", dump_scene_spec(scenes::translating_line(200'000, 50, 0.01, 1, 3)));
    const auto r = cli({"gen", "--spec", (dir / "spec.json").string(), "--events",
                        (dir / "ev.csv").string(), "--gt", (dir / "gt.csv").string()});
    CHECK(r.code == 0);
    CHECK(!read_events(dir / "ev.csv", EventFormat::csv).empty());
    CHECK(!read_ground_truth(dir / "gt.csv").empty());

    // Binary output chosen by extension, seed override reproducible.
    for (const char* name : {"a.bin", "b.bin"}) {
      CHECK(cli({"gen", "--spec", (dir / "spec.json").string(), "--events", (dir / name).string(),
                 "--gt", (dir / "gt2.csv").string(), "--seed", "9"})
                .code == 0);
    }
    CHECK(read_events(dir / "a.bin", EventFormat::binary) ==
          read_events(dir / "b.bin", EventFormat::binary));
  }

  TEST_CASE("gen on an empty spec writes empty files") {
    testutil::TempDir dir("cli");
    write_text(dir / "spec.json", "{}");
    CHECK(cli({"gen", "--spec", (dir / "spec.json").string(), "--events",
               (dir / "ev.csv").string(), "--gt", (dir / "gt.csv").string()})
              .code == 0);
    CHECK(read_events(dir / "ev.csv", EventFormat::csv).empty());
    CHECK(read_ground_truth(dir / "gt.csv").empty());
  }

  TEST_CASE("gen with a missing or bad spec exits with 2") {
    testutil::TempDir dir("cli");
    CHECK(cli({"gen", "--spec", (dir / "nope.json").string(), "--events",
               (dir / "ev.csv").string(), "--gt", (dir / "gt.csv").string()})
              .code == 2);
    write_text(dir / "bad.json", R"({"segments":[{"keyframes":[{"t":0,"x0":1,"y0":1,"x1":1,"y1":1}]}]})");
    CHECK(cli({"gen", "--spec", (dir / "bad.json").string(), "--events",
               (dir / "ev.csv").string(), "--gt", (dir / "gt.csv").string()})
              .code == 2);
  }

  TEST_CASE("lockstep run is reproducible and eval scores it") {
    testutil::TempDir dir("cli");
    write_text(dir / "spec.json", dump_scene_spec(scenes::translating_line(1'000'000, 50, 0.01, 4, 3)));
    REQUIRE(cli({"gen", "--spec", (dir / "spec.json").string(), "--events",
                 (dir / "ev.csv").string(), "--gt", (dir / "gt.csv").string()})
                .code == 0);
    const auto a = cli({"run", "--events", (dir / "ev.csv").string(), "--mode", "lockstep",
                        "--trace", (dir / "t1.csv").string()});
    const auto b = cli({"run", "--events", (dir / "ev.csv").string(), "--mode", "lockstep",
                        "--trace", (dir / "t2.csv").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto hash_line = [](const std::string& s) { return s.substr(s.find("trace_hash")); };
    CHECK(hash_line(a.out) == hash_line(b.out));
    CHECK(read_trace(dir / "t1.csv") == read_trace(dir / "t2.csv"));
    CHECK(a.out.find("Mev/s") != std::string::npos);

    const auto e = cli({"eval", "--trace", (dir / "t1.csv").string(), "--gt",
                        (dir / "gt.csv").string(), "--tolerance", "0.01", "--out",
                        (dir / "pr.csv").string(), "--heatmap-dir", (dir / "heat").string()});
    CHECK(e.code == 0);
    CHECK(std::filesystem::exists(dir / "pr.csv"));
    CHECK(std::filesystem::exists(dir / "heat" / "heatmap_0001.pgm"));
    CHECK(e.out.find("lifetime count=") != std::string::npos);
  }

  TEST_CASE("threaded run prints the metrics summary") {
    testutil::TempDir dir("cli");
    write_text(dir / "spec.json", dump_scene_spec(scenes::mixed(300'000, 0.01, 1, 3)));
    REQUIRE(cli({"gen", "--spec", (dir / "spec.json").string(), "--events",
                 (dir / "ev.bin").string(), "--gt", (dir / "gt.csv").string()})
                .code == 0);
    const auto r = cli({"run", "--events", (dir / "ev.bin").string(), "--mode", "threaded"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Mev/s") != std::string::npos);
    CHECK(r.out.find(" Hz") != std::string::npos);
  }

  TEST_CASE("config file parse failure exits with 2") {
    testutil::TempDir dir("cli");
    write_events({}, dir / "ev.csv", EventFormat::csv);
    write_text(dir / "bad.cfg", "block_size=odd\n");
    CHECK(cli({"run", "--events", (dir / "ev.csv").string(), "--config", (dir / "bad.cfg").string()}).code == 2);
    write_text(dir / "good.cfg", "f_th=0.3\nmode=lockstep\n");
    CHECK(cli({"run", "--events", (dir / "ev.csv").string(), "--config", (dir / "good.cfg").string()}).code == 0);
  }

  TEST_CASE("eval outputs perfect and disjoint series") {
    testutil::TempDir dir("cli");
    std::vector<GroundTruthSegment> gt{{0, 1, 20, 10, 20, 60}, {1'500'000, 1, 30, 10, 30, 60}};
    write_ground_truth(gt, dir / "gt.csv");
    std::vector<TraceRow> same, apart;
    for (const auto& g : gt) {
      TraceRow r;
      r.t_us = g.t;
      r.l_id = 1;
      r.status = LineStatus::GoodTrack;
      r.x0 = g.x0;
      r.y0 = g.y0;
      r.x1 = g.x1;
      r.y1 = g.y1;
      same.push_back(r);
      r.x0 += 100;
      r.x1 += 100;
      apart.push_back(r);
    }
    write_trace(same, dir / "same.csv");
    write_trace(apart, dir / "apart.csv");
    const auto a = cli({"eval", "--trace", (dir / "same.csv").string(), "--gt", (dir / "gt.csv").string()});
    CHECK(a.code == 0);
    CHECK(a.out.find("1,1.000000,1.000000,1.000000") != std::string::npos);
    CHECK(a.out.find("2,1.000000,1.000000,1.000000") != std::string::npos);
    const auto b = cli({"eval", "--trace", (dir / "apart.csv").string(), "--gt", (dir / "gt.csv").string()});
    CHECK(b.out.find("1,0.000000,0.000000,0.000000") != std::string::npos);
    CHECK(cli({"eval", "--trace", (dir / "same.csv").string(), "--gt", (dir / "missing.csv").string()}).code == 2);
  }

  TEST_CASE("viz writes one frame per period") {
    testutil::TempDir dir("cli");
    write_events({}, dir / "empty.csv", EventFormat::csv);
    auto r = cli({"viz", "--events", (dir / "empty.csv").string(), "--out-dir", (dir / "f0").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "frames=0\n");

    std::vector<Event> ev;
    for (std::uint64_t t = 0; t < 1'000'000; t += 1000) ev.push_back({t, static_cast<std::uint16_t>(10 + t / 10'000), 50, 1});
    write_events(ev, dir / "ev.csv", EventFormat::csv);
    r = cli({"viz", "--events", (dir / "ev.csv").string(), "--out-dir", (dir / "f1").string(),
             "--frame-period-us", "100000"});
    CHECK(r.code == 0);
    CHECK(r.out == "frames=10\n");
    const auto first = read_pgm(dir / "f1" / "frame_00000.pgm");
    const auto last = read_pgm(dir / "f1" / "frame_00009.pgm");
    CHECK(first.at(19, 50) > 0);
    CHECK(last.at(10, 50) == 0);
    CHECK(last.at(109, 50) > 0);
  }

  TEST_CASE("bench prints key=value rates") {
    testutil::TempDir dir("cli");
    write_events({}, dir / "empty.csv", EventFormat::csv);
    auto r = cli({"bench", "--events", (dir / "empty.csv").string()});
    CHECK(r.code == 0);
    CHECK(std::stod(value_of(r.out, "scarf_event_rate")) == 0);
    CHECK(std::stod(value_of(r.out, "tracking_freq")) == 0);

    write_events(generate_scene(scenes::mixed(300'000, 0.01, 1, 3)).events, dir / "ev.bin",
                 EventFormat::binary);
    r = cli({"bench", "--events", (dir / "ev.bin").string()});
    CHECK(r.code == 0);
    CHECK(std::stod(value_of(r.out, "scarf_event_rate")) > 0);
    CHECK(std::stod(value_of(r.out, "detection_freq")) > 0);
    CHECK(std::stod(value_of(r.out, "tracking_freq")) > 0);
  }
}
