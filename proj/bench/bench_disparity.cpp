// Serial reference against the OpenMP kernel on the same pair.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>

#include "drishti/stereo.hpp"
#include "drishti/synthetic.hpp"

using namespace drishti;

namespace {

struct Pair {
  GrayImage left, right;
};

const Pair& pair_for(int width) {
  static std::map<int, Pair> cache;
  auto it = cache.find(width);
  if (it == cache.end()) {
    const auto w = static_cast<std::uint32_t>(width);
    auto left = synth::textured_image(w, w * 3 / 4, 17);
    auto right = synth::shift_left(left, 9, 32);
    it = cache.emplace(width, Pair{std::move(left), std::move(right)}).first;
  }
  return it->second;
}

void BM_Reference(benchmark::State& state) {
  const auto& p = pair_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stereo::compute_disparity_reference(p.left, p.right));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.left.width) * p.left.height);
}

void BM_Parallel(benchmark::State& state) {
  const auto& p = pair_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stereo::compute_disparity(p.left, p.right));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.left.width) * p.left.height);
}

}  // namespace

BENCHMARK(BM_Reference)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
