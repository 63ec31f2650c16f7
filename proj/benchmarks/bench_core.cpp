#include <benchmark/benchmark.h>

#include "oneside/grunwald.hpp"
#include "oneside/paths.hpp"
#include "oneside/ratemat.hpp"
#include "oneside/scale.hpp"
#include "oneside/simulate.hpp"

using namespace oneside;

namespace {

const LaplaceExponent& stable15() {
  static const LaplaceExponent e = LaplaceExponent::stable(1.5);
  return e;
}

}  // namespace

static void BM_StableCoeffs(benchmark::State& state) {
  const auto j = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_coeffs(stable15(), 0.01, j));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StableCoeffs)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();

static void BM_TemperedCoeffs(benchmark::State& state) {
  const auto e = LaplaceExponent::tempered_stable(1.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_coeffs(e, 0.01, 4096));
}
BENCHMARK(BM_TemperedCoeffs);

static void BM_CauchyOracle(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_coeffs_cauchy(stable15(), 0.1, 64, 0.9));
}
BENCHMARK(BM_CauchyOracle);

static void BM_BuildRestricted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = compute_coeffs(stable15(), 2.0 / (n + 1), 4 * (n + 1));
  const auto bc = BoundaryPair::parse("ND");
  for (auto _ : state) benchmark::DoNotOptimize(build_restricted(stable15(), c, n, bc));
}
BENCHMARK(BM_BuildRestricted)->Arg(9)->Arg(99)->Arg(499);

static void BM_MeanAbsorption(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = compute_coeffs(stable15(), 2.0 / (n + 1), 4 * (n + 1));
  const auto q = build_restricted(stable15(), c, n, BoundaryPair::parse("ND"));
  for (auto _ : state) benchmark::DoNotOptimize(mean_absorption(q, static_cast<long>((n + 1) / 2)));
}
BENCHMARK(BM_MeanAbsorption)->Arg(39)->Arg(159);

static void BM_SemigroupRow(benchmark::State& state) {
  const std::size_t n = 9;
  const auto c = compute_coeffs(stable15(), 0.2, 40);
  const auto q = build_restricted(stable15(), c, n, BoundaryPair::parse("NN"));
  for (auto _ : state) benchmark::DoNotOptimize(semigroup_row(q, 1.0, 5));
}
BENCHMARK(BM_SemigroupRow);

static void BM_BoundaryWalk(benchmark::State& state) {
  const std::size_t n = 9;
  ExcursionOptions opts;
  const auto c = compute_coeffs(stable15(), 0.2, opts.literal_steps + n + 12);
  const BoundarySimulator sim(c, n, SideRules::from(BoundaryPair::parse("NN")), opts);
  std::uint64_t k = 0;
  for (auto _ : state) {
    Rng rng = make_stream(1, k++);
    benchmark::DoNotOptimize(sim.run(5, 1.0, rng));
  }
}
BENCHMARK(BM_BoundaryWalk);

static void BM_TwoSidedReflection(benchmark::State& state) {
  const auto c = compute_coeffs(stable15(), 0.01, 1 << 16);
  SimConfig cfg;
  cfg.T = 5.0;
  const auto p = simulate_cp(c, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(reflect_two_sided(p, -0.5, 0.5));
  state.counters["jumps"] = static_cast<double>(p.jump_count());
}
BENCHMARK(BM_TwoSidedReflection);

static void BM_J1Distance(benchmark::State& state) {
  const auto c = compute_coeffs(stable15(), 0.01, 1 << 16);
  SimConfig cfg;
  const auto p = simulate_cp(c, cfg, 0);
  const auto q = scale_path(p, 1.01);
  for (auto _ : state) benchmark::DoNotOptimize(j1_distance(p, q, 1.0));
}
BENCHMARK(BM_J1Distance);

static void BM_ZqSeries(benchmark::State& state) {
  const ScaleKit kit(stable15(), {1.0, static_cast<std::size_t>(state.range(0)), 1.0});
  const std::vector<double> one(kit.m() + 1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kit.Zq_apply(one));
}
BENCHMARK(BM_ZqSeries)->Arg(1024)->Arg(4096);

static void BM_MittagLeffler(benchmark::State& state) {
  double x = -30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mittag_leffler(1.5, 1.0, x));
    x = x < 30.0 ? x + 0.5 : -30.0;
  }
}
BENCHMARK(BM_MittagLeffler);
BENCHMARK_MAIN();
