#include "evline/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "evline/config.hpp"
#include "evline/eval.hpp"
#include "evline/events.hpp"
#include "evline/lattice.hpp"
#include "evline/pipeline.hpp"
#include "evline/scarf.hpp"
#include "evline/scene.hpp"
#include "evline/trace.hpp"

namespace evline {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

EventFormat format_for(const std::string& flag, const fs::path& path) {
  if (!flag.empty()) return parse_event_format(flag);
  return path.extension() == ".bin" ? EventFormat::binary : EventFormat::csv;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// Config shared by run, viz and bench: file, then individual overrides.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> set;
  std::optional<int> width, height, block_size;
  std::optional<double> alpha, f_th, delta_q;
  std::optional<std::size_t> events_per_step;
  std::string mode;

  void add(CLI::App* cmd, bool with_mode) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", set, "override a config key (key=value), repeatable");
    cmd->add_option("--width", width, "sensor width");
    cmd->add_option("--height", height, "sensor height");
    cmd->add_option("--block-size", block_size, "lattice block size b");
    cmd->add_option("--alpha", alpha, "buffer capacity factor");
    cmd->add_option("--f-th", f_th, "fitting score threshold");
    cmd->add_option("--delta-q", delta_q, "perturbation step");
    if (with_mode) {
      cmd->add_option("--mode", mode, "threaded or lockstep")
          ->check(CLI::IsMember({"threaded", "lockstep"}));
      cmd->add_option("--events-per-step", events_per_step, "lockstep ingestion chunk");
    }
  }

  PipelineConfig build() const {
    ConfigEntries entries;
    if (!config_path.empty()) entries = load_config_file(config_path);
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      entries[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    auto put = [&](const char* key, const auto& v) {
      if (v) {
        std::ostringstream os;
        os.precision(17);
        os << *v;
        entries[key] = os.str();
      }
    };
    put("width", width);
    put("height", height);
    put("block_size", block_size);
    put("alpha", alpha);
    put("f_th", f_th);
    put("delta_q", delta_q);
    put("events_per_step", events_per_step);
    if (!mode.empty()) entries["mode"] = mode;
    PipelineConfig c = make_config(entries);
    apply_environment(c);
    return c;
  }
};

int cmd_gen(const std::string& spec_path, const std::string& events_path,
            const std::string& gt_path, const std::string& format,
            std::optional<std::uint64_t> seed, std::ostream& out) {
  SceneSpec spec = load_scene_spec(spec_path);
  if (seed) spec.seed = *seed;
  const Scene scene = generate_scene(spec);
  write_events(scene.events, events_path, format_for(format, events_path));
  write_ground_truth(scene.ground_truth, gt_path);
  out << "events=" << scene.events.size() << " gt_rows=" << scene.ground_truth.size() << "\n";
  return 0;
}

int cmd_run(const std::string& events_path, const std::string& format, const ConfigFlags& flags,
            const std::string& trace_path, std::ostream& out) {
  const PipelineConfig config = flags.build();
  const auto events = read_events(events_path, format_for(format, events_path));
  const RunResult r = run_pipeline(events, config);
  if (!trace_path.empty()) write_trace(r.trace, trace_path);
  const auto& m = r.metrics;
  const auto life = summarize_lifetimes(m.lifetimes_s);
  out << describe(config) << "\n";
  out << "                 event rate    detection    tracking\n";
  out << "evline       " << fmt("%10.2f Mev/s", m.scarf_event_rate * 1e-6)
      << fmt("%9.0f Hz", m.detection_freq) << fmt("%9.0f Hz", m.tracking_freq) << "\n";
  out << "window " << (m.window_fallback ? "whole run" : "steady state") << fmt(" %.3f s wall", m.window_wall_s)
      << "\n";
  out << "events " << m.events_ingested << " rejected " << m.events_rejected << "\n";
  out << "segments " << life.count << fmt(" lifetime mean %.3f s", life.mean)
      << fmt(" std %.3f s", life.std) << fmt(" max %.3f s", life.max) << "\n";
  out << "illegal_transitions " << m.illegal_transitions << " admin_violations "
      << m.admin_violations << "\n";
  out << "trace_rows " << r.trace.size() << "\n";
  out << "trace_hash " << hex(trace_hash(r.trace)) << "\n";
  return 0;
}

int cmd_eval(const std::string& trace_path, const std::string& gt_path, double tolerance,
             std::optional<int> width, std::optional<int> height, const std::string& out_path,
             const std::string& heatmap_dir, std::ostream& out) {
  if (!fs::exists(trace_path)) throw UsageError("missing trace " + trace_path);
  if (!fs::exists(gt_path)) throw UsageError("missing ground truth " + gt_path);
  if (!(tolerance > 0)) throw UsageError("--tolerance must be positive");
  const auto trace = read_trace(trace_path);
  const auto gt = read_ground_truth(gt_path);
  const SensorGeometry sensor{width.value_or(240), height.value_or(180)};
  HeatMapParams params;
  params.tolerance_fraction = tolerance;
  const auto series = pr_series(trace, gt, sensor, params);
  if (!out_path.empty()) write_pr_csv(series, out_path);
  if (!heatmap_dir.empty()) {
    fs::create_directories(heatmap_dir);
    for (const auto& p : series) {
      const auto t_us = static_cast<std::uint64_t>(p.t) * 1'000'000;
      char name[64];
      std::snprintf(name, sizeof(name), "heatmap_%04d.pgm", static_cast<int>(p.t));
      write_pgm(heat_map_frame(trace, gt, sensor, t_us), fs::path(heatmap_dir) / name);
    }
  }
  out << "t_s,precision,recall,f_score\n";
  for (const auto& p : series) {
    out << fmt("%g", p.t) << fmt(",%.6f", p.precision) << fmt(",%.6f", p.recall)
        << fmt(",%.6f", p.f_score) << "\n";
  }
  const auto life = lifetime_stats(trace);
  out << "lifetime count=" << life.count << fmt(" mean=%.6f", life.mean)
      << fmt(" std=%.6f", life.std) << fmt(" max=%.6f", life.max) << "\n";
  return 0;
}

int cmd_viz(const std::string& events_path, const std::string& format, const ConfigFlags& flags,
            const std::string& out_dir, std::uint64_t period_us, std::ostream& out) {
  if (period_us == 0) throw UsageError("--frame-period-us must be positive");
  const PipelineConfig config = flags.build();
  const auto events = read_events(events_path, format_for(format, events_path));
  fs::create_directories(out_dir);
  const LatticeGeometry geometry(config.sensor, config.block_size);
  ScarfStorage storage(geometry, config.alpha);
  std::size_t frames = 0;
  if (!events.empty()) {
    const std::uint64_t t0 = events.front().t;
    const std::uint64_t span = events.back().t + 1 - t0;
    const std::uint64_t count = (span + period_us - 1) / period_us;
    std::size_t i = 0;
    for (std::uint64_t k = 1; k <= count; ++k) {
      const std::uint64_t limit = t0 + k * period_us;
      while (i < events.size() && events[i].t < limit) storage.insert(events[i++]);
      char name[64];
      std::snprintf(name, sizeof(name), "frame_%05llu.pgm", static_cast<unsigned long long>(k - 1));
      write_pgm(storage.render_frame(), fs::path(out_dir) / name);
      ++frames;
    }
  }
  out << "frames=" << frames << "\n";
  return 0;
}

int cmd_bench(const std::string& events_path, const std::string& format, ConfigFlags flags,
              std::ostream& out) {
  flags.mode = "threaded";
  PipelineConfig config = flags.build();
  config.playback = Playback::as_fast_as_possible;
  const auto events = read_events(events_path, format_for(format, events_path));
  const RunResult r = run_threaded(events, config);
  const auto& m = r.metrics;
  out << "scarf_event_rate=" << fmt("%.1f", m.scarf_event_rate) << "\n";
  out << "scarf_event_rate_mev=" << fmt("%.4f", m.scarf_event_rate * 1e-6) << "\n";
  out << "detection_freq=" << fmt("%.2f", m.detection_freq) << "\n";
  out << "tracking_freq=" << fmt("%.2f", m.tracking_freq) << "\n";
  out << "window_fallback=" << (m.window_fallback ? 1 : 0) << "\n";
  out << "window_wall_s=" << fmt("%.6f", m.window_wall_s) << "\n";
  out << "events=" << m.events_ingested << "\n";
  out << "events_rejected=" << m.events_rejected << "\n";
  out << "loop_threads=" << config.loop_threads << "\n";
  out << "illegal_transitions=" << m.illegal_transitions << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event-camera line segment detection and tracking", "evline"};
  app.require_subcommand(1, 1);

  std::string spec_path, events_path, gt_path, trace_path, format, out_path, out_dir, heatmap_dir;
  std::optional<std::uint64_t> seed;
  double tolerance = 0.01;
  std::uint64_t frame_period_us = 100'000;
  std::optional<int> eval_width, eval_height;
  ConfigFlags run_flags, viz_flags, bench_flags;

  auto* gen = app.add_subcommand("gen", "generate a synthetic scene");
  gen->add_option("--spec", spec_path, "scene spec JSON")->required();
  gen->add_option("--events", events_path, "output events file")->required();
  gen->add_option("--gt", gt_path, "output ground-truth CSV")->required();
  gen->add_option("--format", format, "csv or binary (default from extension)");
  gen->add_option("--seed", seed, "override the spec seed");

  auto* run = app.add_subcommand("run", "run the pipeline and write a trace");
  run->add_option("--events", events_path, "input events file")->required();
  run->add_option("--format", format, "csv or binary (default from extension)");
  run->add_option("--trace", trace_path, "output trace CSV");
  run->add_option("--seed", seed, "accepted for reproducible scripts; runs are deterministic in lockstep");
  run_flags.add(run, true);

  auto* eval = app.add_subcommand("eval", "heat-map precision/recall and lifetimes");
  eval->add_option("--trace", trace_path, "trace CSV")->required();
  eval->add_option("--gt", gt_path, "ground-truth CSV")->required();
  eval->add_option("--tolerance", tolerance, "tolerance as a fraction of the diagonal");
  eval->add_option("--width", eval_width, "sensor width");
  eval->add_option("--height", eval_height, "sensor height");
  eval->add_option("--out", out_path, "output PR CSV");
  eval->add_option("--heatmap-dir", heatmap_dir, "directory for per-second heat-map PGMs");

  auto* viz = app.add_subcommand("viz", "dump SCARF frames as PGM");
  viz->add_option("--events", events_path, "input events file")->required();
  viz->add_option("--format", format, "csv or binary (default from extension)");
  viz->add_option("--out-dir", out_dir, "output directory")->required();
  viz->add_option("--frame-period-us", frame_period_us, "frame period in microseconds");
  viz_flags.add(viz, false);

  auto* bench = app.add_subcommand("bench", "threaded throughput benchmark");
  bench->add_option("--events", events_path, "input events file")->required();
  bench->add_option("--format", format, "csv or binary (default from extension)");
  bench_flags.add(bench, false);

  std::vector<const char*> argv;
  argv.push_back("evline");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "evline: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen) return cmd_gen(spec_path, events_path, gt_path, format, seed, out);
    if (*run) return cmd_run(events_path, format, run_flags, trace_path, out);
    if (*eval) {
      return cmd_eval(trace_path, gt_path, tolerance, eval_width, eval_height, out_path,
                      heatmap_dir, out);
    }
    if (*viz) return cmd_viz(events_path, format, viz_flags, out_dir, frame_period_us, out);
    if (*bench) return cmd_bench(events_path, format, bench_flags, out);
  } catch (const std::exception& e) {
    err << "evline: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace evline
