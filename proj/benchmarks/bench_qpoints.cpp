// microbenchmarks for the hot paths: factoring, point search, fibre
// enumeration, and the sweep engine
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qpoints/curves.hpp"
#include "qpoints/factor.hpp"
#include "qpoints/fibre.hpp"
#include "qpoints/mordell.hpp"
#include "qpoints/sweep.hpp"

namespace {

void BM_FactorU64(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::vector<qp::u64> pool(1024);
  for (auto& n : pool) n = (rng() >> 1) | 1;
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qp::factor_u64(pool[i++ & 1023]));
  }
}
BENCHMARK(BM_FactorU64);

void BM_PointSearchWindow(benchmark::State& state) {
  const long window = state.range(0);
  qp::WeierstrassCurve curve(0, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qp::search_integral_points(curve, -window, window));
  }
  state.SetItemsProcessed(state.iterations() * (2 * window + 1));
}
BENCHMARK(BM_PointSearchWindow)->Arg(1000)->Arg(100000);

void BM_FlatteningTransforms(benchmark::State& state) {
  const qp::i64 box = state.range(0);
  qp::WeierstrassCurve curve(0, 17);
  qp::BinaryQuartic f = qp::point_to_quartic(curve, {-2, 3});
  for (auto _ : state) {
    benchmark::DoNotOptimize(qp::flattening_transforms(f, box));
  }
  state.SetItemsProcessed(state.iterations() * (2 * box + 1) * (2 * box + 1));
}
BENCHMARK(BM_FlatteningTransforms)->Arg(50)->Arg(200);

void BM_SweepStats(benchmark::State& state) {
  qp::SweepOptions opt;
  opt.height_max = state.range(0);
  opt.t_list = {1};
  opt.census_moduli = {4, 9};
  opt.want_records = false;
  opt.shards = 8;
  opt.workers = 1;
  for (auto _ : state) {
    qp::SweepResult res = qp::run_sweep(opt);
    benchmark::DoNotOptimize(res.totals.curves);
    state.SetItemsProcessed(state.items_processed() + res.totals.curves);
  }
}
BENCHMARK(BM_SweepStats)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
