#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "cu3d/geometry.hpp"

namespace {

void BM_voxel_downsample(benchmark::State& state) {
  const auto cloud = bench::random_cloud(state.range(0), 2.0, 42);
  for (auto _ : state) {
    auto out = cu3d::voxel_downsample(cloud, 0.05);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_voxel_downsample)->Range(1 << 10, 1 << 18);

void BM_radius_match(benchmark::State& state) {
  const auto a = bench::random_cloud(state.range(0), 1.0, 7);
  const auto b = bench::random_cloud(state.range(0), 1.0, 8);
  for (auto _ : state) {
    auto pairs = cu3d::radius_match(a, b, 0.075);
    benchmark::DoNotOptimize(pairs);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_radius_match)->Range(1 << 8, 1 << 15);

void BM_backproject(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  cu3d::CameraIntrinsics intr{double(side), double(side), (side - 1) / 2.0, (side - 1) / 2.0,
                              side, side};
  cu3d::DepthMap depth(side, side, 2.0f);
  cu3d::InstanceMap ids(side, side, 1);
  for (auto _ : state) {
    auto cloud = cu3d::backproject(depth, intr, cu3d::Pose{}, ids);
    benchmark::DoNotOptimize(cloud);
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_backproject)->Arg(128)->Arg(256)->Arg(512);

}  // namespace
