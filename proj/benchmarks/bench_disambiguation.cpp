#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "cu3d/disambiguation.hpp"

namespace {

cu3d::MaskGroup shifted_copies_group(int num_masks, std::size_t points_per_mask) {
  cu3d::MaskGroup group;
  group.rendered_id = 1;
  for (int m = 0; m < num_masks; ++m) {
    cu3d::MaskRecord rec;
    rec.mask_index = static_cast<std::uint32_t>(m + 1);
    rec.index_set = {{1, m}};
    rec.cloud = bench::random_cloud(points_per_mask, 1.0, 100 + m);
    for (auto& p : rec.cloud.points) {
      p.label = rec.mask_index;
      p.mask_index = rec.mask_index;
    }
    group.records.push_back(std::move(rec));
  }
  return group;
}

void BM_compare_pair(benchmark::State& state) {
  const auto a = bench::random_cloud(state.range(0), 1.0, 1);
  auto b = a;
  for (auto& p : b.points) p.label = 2;
  for (auto _ : state) {
    auto res = cu3d::compare_pair(a, b, 0.075, 50);
    benchmark::DoNotOptimize(res);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_compare_pair)->Range(1 << 9, 1 << 14);

void BM_disambiguate_group(benchmark::State& state) {
  const auto group = shifted_copies_group(static_cast<int>(state.range(0)), 2000);
  for (auto _ : state) {
    auto res = cu3d::disambiguate_group(group, {});
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_disambiguate_group)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
