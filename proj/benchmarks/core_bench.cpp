#include <benchmark/benchmark.h>

#include "infervar/estimate.hpp"
#include "infervar/metrics.hpp"
#include "infervar/segment.hpp"
#include "infervar/transform.hpp"

namespace infervar {
namespace {

ImageTensor scene(std::size_t side) { return synthetic_scene(side, side, 1, 7); }

void BM_ApplyTransform(benchmark::State& state) {
  const ImageTensor x = scene(static_cast<std::size_t>(state.range(0)));
  const Transform t = make_transform(1, true);
  for (auto _ : state) benchmark::DoNotOptimize(apply_transform(x, t));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ApplyTransform)->Arg(64)->Arg(256);

void BM_VarianceMap(benchmark::State& state) {
  SampleSet set;
  for (std::uint64_t k = 0; k < 32; ++k) set.samples.push_back(synthetic_scene(128, 128, 1, k));
  for (auto _ : state) benchmark::DoNotOptimize(variance_map(set));
}
BENCHMARK(BM_VarianceMap);

void BM_ToyForward(benchmark::State& state) {
  const ToyUpsamplerModel model(3);
  const ImageTensor x = scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_ToyForward)->Arg(32)->Arg(64);

void BM_NoiseSampling(benchmark::State& state) {
  const ToyUpsamplerModel model(3);
  const ImageTensor x = scene(32);
  const PerturbationSpec spec = noise_spec("loc2", 0.1, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sample(model, x, spec, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_NoiseSampling)->Arg(1)->Arg(4);

void BM_Sparsification(benchmark::State& state) {
  const ImageTensor u = synthetic_scene(256, 256, 1, 1), e = synthetic_scene(256, 256, 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sparsification(u.values(), e.values()));
}
BENCHMARK(BM_Sparsification);

void BM_LcmSegment(benchmark::State& state) {
  const ImageTensor x = scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lcm_segment(x));
}
BENCHMARK(BM_LcmSegment)->Arg(32)->Arg(64);

}  // namespace
}  // namespace infervar

BENCHMARK_MAIN();
