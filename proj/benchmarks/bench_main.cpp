#include <benchmark/benchmark.h>

#include <map>

#include "affseg/affseg.hpp"

using namespace affseg;

namespace {

struct Instance {
  LabelVolume gt;
  AffinityVolume aff;
  LabelVolume ws;
};

// Noisy synthetic volume of edge `n` (n/4 sections), built once per size.
const Instance& instance(std::int64_t n) {
  static std::map<std::int64_t, Instance> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const Shape3 s{static_cast<std::uint64_t>(n / 4), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n)};
  SynthParams sp;
  sp.n_seeds = static_cast<std::uint64_t>(n / 2);
  const LabelVolume gt = synth_labels(s, sp);
  NoiseParams np;
  np.flip_sigma = 0.15;
  np.jitter_prob = 0.3;
  AffinityVolume aff = synth_affinities(gt, np);
  WatershedParams wp;
  wp.size_min = 0;
  LabelVolume ws = zwatershed(aff, wp).labels;
  return cache.emplace(n, Instance{gt, std::move(aff), std::move(ws)}).first->second;
}

void BM_MalisCounts(benchmark::State& state) {
  const Instance& in = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(malis_edge_counts(in.aff, in.gt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.aff.voxels()));
}
BENCHMARK(BM_MalisCounts)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Watershed(benchmark::State& state) {
  const Instance& in = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(zwatershed(in.aff, WatershedParams{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.aff.voxels()));
}
BENCHMARK(BM_Watershed)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BuildRag(benchmark::State& state) {
  const Instance& in = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_rag(in.ws, in.aff));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.aff.voxels()));
}
BENCHMARK(BM_BuildRag)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Agglomerate(benchmark::State& state) {
  const Instance& in = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(agglomerate(in.ws, in.aff, Scorer::mean_affinity(), 0.0));
}
BENCHMARK(BM_Agglomerate)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SplitVi(benchmark::State& state) {
  const Instance& in = instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(split_vi(in.ws, in.gt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.gt.size()));
}
BENCHMARK(BM_SplitVi)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
