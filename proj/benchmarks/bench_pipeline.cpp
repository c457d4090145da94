#include <benchmark/benchmark.h>

#include "cu3d/pipeline.hpp"
#include "cu3d/synthetic.hpp"

namespace {

cu3d::SceneData bench_scene(int objects, int views, int width, int height) {
  const cu3d::SceneSpec spec = cu3d::make_ring_scene(objects, views, width, height, 7);
  const cu3d::RenderedViews gt = cu3d::render_views(spec);
  cu3d::CorruptionSpec corruption;
  corruption.alias_rate = 0.3;
  corruption.fragmentation_rate = 0.3;
  const cu3d::CorruptedScene corrupted = cu3d::corrupt(gt, corruption, 7);
  cu3d::SceneData data;
  data.intrinsics = spec.intrinsics;
  data.poses = spec.cameras;
  data.depths = gt.depths;
  data.labels = corrupted.labels;
  data.rendered = corrupted.rendered;
  data.semantics = corrupted.semantics;
  data.gt_instances = gt.instances;
  return data;
}

void BM_render_views(benchmark::State& state) {
  const auto spec = cu3d::make_ring_scene(10, 20, static_cast<int>(state.range(0)),
                                          static_cast<int>(state.range(0)) * 3 / 4, 7);
  for (auto _ : state) {
    auto views = cu3d::render_views(spec);
    benchmark::DoNotOptimize(views);
  }
}
BENCHMARK(BM_render_views)->Arg(128)->Arg(256);

void BM_pipeline(benchmark::State& state) {
  const auto scene = bench_scene(10, 20, static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(0)) * 3 / 4);
  cu3d::PipelineConfig config;
  config.workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto result = cu3d::run_pipeline(scene, config);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_pipeline)->Args({128, 1})->Args({128, 4})->Args({256, 1})->Args({256, 4});

}  // namespace
