#include <vector>

#include <benchmark/benchmark.h>

#include "ghosttrack/scenarios.hpp"
#include "ghosttrack/sequence.hpp"
#include "ghosttrack/synthworld.hpp"
#include "ghosttrack/tracker.hpp"

namespace {

using namespace ghosttrack;

// Pre-rendered frames so only Tracker::step is timed.
std::vector<FrameData> rendered(const Scenario& sc) {
  SynthFrameSource src(sc);
  std::vector<FrameData> frames;
  while (auto f = src.next()) frames.push_back(std::move(*f));
  return frames;
}

void BM_TrackerSequence(benchmark::State& state) {
  const Scenario sc = scenarios::benchmark(1);
  const Config cfg = scenario_config(sc);
  const std::vector<FrameData> frames = rendered(sc);
  for (auto _ : state) {
    Tracker tracker(cfg, sc.camera);
    for (const FrameData& f : frames)
      benchmark::DoNotOptimize(tracker.step(f.frame, f.detections, f.depth ? &*f.depth : nullptr, f.warp));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(frames.size()));
}
BENCHMARK(BM_TrackerSequence)->Unit(benchmark::kMillisecond);

void BM_RenderFrame(benchmark::State& state) {
  const Scenario sc = scenarios::benchmark(1);
  int frame = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_frame(sc, frame));
    frame = frame % sc.frames + 1;
  }
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMicrosecond);

}  // namespace
