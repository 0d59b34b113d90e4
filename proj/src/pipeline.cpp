#include "evline/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "evline/detector.hpp"
#include "evline/eval.hpp"
#include "evline/lattice.hpp"
#include "evline/line_state.hpp"
#include "evline/scarf.hpp"
#include "evline/tracker.hpp"

namespace evline {

namespace {

using Clock = std::chrono::steady_clock;

struct Mark {
  Clock::time_point wall;
  std::uint64_t events = 0;
  std::uint64_t detection = 0;
  std::uint64_t tracking = 0;
};

// Counter snapshots taken by the ingestion role when the stream crosses the
// window boundaries.
class WindowMarks {
 public:
  WindowMarks(std::uint64_t start_us, std::uint64_t end_us) : start_us_(start_us), end_us_(end_us) {}

  template <typename SnapFn>
  void observe(std::uint64_t t_us, SnapFn&& snap) {
    if (!has_begin_ && t_us >= start_us_) {
      begin_ = snap();
      has_begin_ = true;
    }
    if (has_begin_ && !has_end_ && t_us > end_us_) {
      end_ = snap();
      has_end_ = true;
    }
  }

  // Without a start mark the window is the whole run, from start to run_end.
  void finish(const Mark& run_start, const Mark& ingestion_end, const Mark& run_end,
              PipelineMetrics& m) const {
    Mark b = run_start;
    Mark e = run_end;
    if (has_begin_) {
      b = begin_;
      e = has_end_ ? end_ : ingestion_end;
    } else {
      m.window_fallback = true;
    }
    const double wall = std::chrono::duration<double>(e.wall - b.wall).count();
    m.window_wall_s = wall;
    m.events_in_window = e.events - b.events;
    m.detection_passes_in_window = e.detection - b.detection;
    m.tracking_passes_in_window = e.tracking - b.tracking;
    if (wall > 0) {
      m.scarf_event_rate = static_cast<double>(m.events_in_window) / wall;
      m.detection_freq = static_cast<double>(m.detection_passes_in_window) / wall;
      m.tracking_freq = static_cast<double>(m.tracking_passes_in_window) / wall;
    }
  }

 private:
  std::uint64_t start_us_;
  std::uint64_t end_us_;
  Mark begin_;
  Mark end_;
  bool has_begin_ = false;
  bool has_end_ = false;
};

// Detection and tracking state plus the per-pass bookkeeping shared by both modes.
class Engine {
 public:
  explicit Engine(const PipelineConfig& config)
      : config_(config),
        params_(config.line_params()),
        geometry_(config.sensor, config.block_size),
        storage_(geometry_, config.alpha),
        state_(geometry_) {}

  ScarfStorage& storage() { return storage_; }
  Trace& trace() { return trace_; }

  void detect(std::uint64_t now_us) { detection_pass(storage_, state_, params_, now_us, &trace_); }

  void track(std::uint64_t now_us) {
    const auto stats = tracking_pass(storage_, state_, params_, now_us, &trace_);
    if (config_.check_invariants) {
      ++admin_checks_;
      if (!state_.admin_unique()) ++admin_violations_;
    }
    if (samples_.empty() || now_us >= samples_.back().first + 1000) {
      samples_.emplace_back(now_us, stats.live_after);
    }
  }

  RunResult finish(PipelineMetrics m, std::uint64_t run_end_us) {
    RunResult r;
    r.trace = trace_.take();
    m.run_end_us = run_end_us;
    m.events_ingested = storage_.inserted();
    m.events_rejected = storage_.rejected();
    m.live_segment_count = std::move(samples_);
    m.lifetimes_s = segment_lifetimes(r.trace, run_end_us);
    m.transitions = state_.transitions();
    m.illegal_transitions = state_.illegal_transitions();
    m.admin_checks = admin_checks_;
    m.admin_violations = admin_violations_;
    r.metrics = std::move(m);
    return r;
  }

 private:
  PipelineConfig config_;
  LineParams params_;
  LatticeGeometry geometry_;
  ScarfStorage storage_;
  LatticeState state_;
  Trace trace_;
  std::vector<std::pair<std::uint64_t, std::size_t>> samples_;
  std::uint64_t admin_checks_ = 0;
  std::uint64_t admin_violations_ = 0;
};

void pace(const Event& e, std::uint64_t t0, Clock::time_point wall0) {
  const auto due = wall0 + std::chrono::microseconds(e.t - t0);
  if (due > Clock::now() + std::chrono::microseconds(200)) std::this_thread::sleep_until(due);
}

}  // namespace

RunResult run_lockstep(std::span<const Event> events, const PipelineConfig& config) {
  config.validate();
  Engine engine(config);
  PipelineMetrics m;
  WindowMarks window(config.window_start_us, config.window_end_us);
  const auto start = Clock::now();
  std::uint64_t passes = 0;
  auto snap = [&](std::uint64_t consumed) {
    return Mark{Clock::now(), consumed, passes, passes};
  };
  const Mark run_start = snap(0);

  std::uint64_t now = 0;
  for (std::size_t i = 0; i < events.size(); i += config.events_per_step) {
    const std::size_t n = std::min(config.events_per_step, events.size() - i);
    const auto chunk = events.subspan(i, n);
    if (config.playback == Playback::wall_clock) {
      for (const auto& e : chunk) pace(e, events.front().t, start);
    }
    window.observe(chunk.front().t, [&] { return snap(i); });
    engine.storage().insert(chunk);
    now = chunk.back().t;
    engine.detect(now);
    engine.track(now);
    ++passes;
  }
  const Mark end = snap(events.size());
  window.finish(run_start, end, end, m);
  m.detection_passes = m.tracking_passes = passes;
  m.wall_s = std::chrono::duration<double>(end.wall - start).count();
  return engine.finish(std::move(m), now);
}

RunResult run_threaded(std::span<const Event> events, const PipelineConfig& config) {
  config.validate();
  Engine engine(config);
  PipelineMetrics m;
  WindowMarks window(config.window_start_us, config.window_end_us);

  std::atomic<std::uint64_t> now_us{0};
  std::atomic<std::uint64_t> detection_passes{0};
  std::atomic<std::uint64_t> tracking_passes{0};
  std::atomic<bool> stop{false};

  auto snap = [&](std::uint64_t consumed) {
    return Mark{Clock::now(), consumed, detection_passes.load(std::memory_order_relaxed),
                tracking_passes.load(std::memory_order_relaxed)};
  };

  auto detection_loop = [&] {
    while (!stop.load(std::memory_order_acquire)) {
      engine.detect(now_us.load(std::memory_order_acquire));
      detection_passes.fetch_add(1, std::memory_order_relaxed);
    }
  };
  auto tracking_loop = [&] {
    while (!stop.load(std::memory_order_acquire)) {
      engine.track(now_us.load(std::memory_order_acquire));
      tracking_passes.fetch_add(1, std::memory_order_relaxed);
    }
  };
  auto combined_loop = [&] {
    while (!stop.load(std::memory_order_acquire)) {
      const auto now = now_us.load(std::memory_order_acquire);
      engine.detect(now);
      detection_passes.fetch_add(1, std::memory_order_relaxed);
      engine.track(now);
      tracking_passes.fetch_add(1, std::memory_order_relaxed);
    }
  };

  const Mark run_start = snap(0);
  std::vector<std::thread> loops;
  if (config.loop_threads == 1) {
    loops.emplace_back(combined_loop);
  } else {
    loops.emplace_back(detection_loop);
    loops.emplace_back(tracking_loop);
  }

  Mark ingestion_end;
  std::thread ingestion([&] {
    const bool paced = config.playback == Playback::wall_clock;
    const std::uint64_t t0 = events.empty() ? 0 : events.front().t;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const Event& e = events[i];
      if (paced) pace(e, t0, run_start.wall);
      window.observe(e.t, [&] { return snap(i); });
      engine.storage().insert(e);
      now_us.store(e.t, std::memory_order_release);
    }
    ingestion_end = snap(events.size());
  });
  ingestion.join();

  // Let every loop finish one full pass that started after the last event.
  const auto det0 = detection_passes.load();
  const auto trk0 = tracking_passes.load();
  while (detection_passes.load() < det0 + 2 || tracking_passes.load() < trk0 + 2) {
    std::this_thread::yield();
  }
  stop.store(true, std::memory_order_release);
  for (auto& t : loops) t.join();
  const Mark run_end = snap(events.size());
  const auto end_wall = run_end.wall;

  window.finish(run_start, ingestion_end, run_end, m);
  if (events.empty()) {
    m.scarf_event_rate = m.detection_freq = m.tracking_freq = 0;
  }
  m.detection_passes = detection_passes.load();
  m.tracking_passes = tracking_passes.load();
  m.wall_s = std::chrono::duration<double>(end_wall - run_start.wall).count();
  return engine.finish(std::move(m), events.empty() ? 0 : events.back().t);
}

RunResult run_pipeline(std::span<const Event> events, const PipelineConfig& config) {
  return config.mode == RunMode::lockstep ? run_lockstep(events, config)
                                          : run_threaded(events, config);
}

}  // namespace evline
