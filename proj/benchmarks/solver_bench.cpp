#include <benchmark/benchmark.h>

#include "covlqr/bench.hpp"
#include "covlqr/conic.hpp"
#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"
#include "covlqr/direct_lqr.hpp"

using namespace covlqr;

namespace {

SampleCov benchmark_cov(double sigma, std::uint64_t seed) {
  const auto model = SystemModel::laplacian_benchmark();
  return sample_covariances(generate_batch(model, 20, sigma, DataMode::iid_pairs, seed));
}

}  // namespace

static void BM_SolveDare(benchmark::State& state) {
  const auto model = SystemModel::laplacian_benchmark();
  const auto pen = PenaltyPair::laplacian_benchmark();
  for (auto _ : state) benchmark::DoNotOptimize(solve_dare(model, pen).cost);
}
BENCHMARK(BM_SolveDare);

static void BM_SolveDlyap(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Matrix F = 0.9 * Matrix::Identity(n, n) + 0.05 * Matrix::Ones(n, n) / static_cast<double>(n);
  const Matrix W = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dlyap(F, W).trace());
}
BENCHMARK(BM_SolveDlyap)->Arg(3)->Arg(10)->Arg(30);

static void BM_CertaintyEquivalence(benchmark::State& state) {
  const auto cov = benchmark_cov(0.7, 1);
  const auto pen = PenaltyPair::laplacian_benchmark();
  for (auto _ : state) benchmark::DoNotOptimize(ce_gain(cov, pen).objective);
}
BENCHMARK(BM_CertaintyEquivalence);

static void BM_AssembleSdp(benchmark::State& state) {
  const auto cov = benchmark_cov(0.7, 1);
  const auto pen = PenaltyPair::laplacian_benchmark();
  for (auto _ : state) benchmark::DoNotOptimize(conic::assemble(cov, pen, 0.1).num_vars());
}
BENCHMARK(BM_AssembleSdp);

// Full regularized SDP solve; range(0) is 1000 * lambda.
static void BM_SolveRegularized(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0)) / 1000.0;
  const auto cov = benchmark_cov(0.7, 1);
  const auto pen = PenaltyPair::laplacian_benchmark();
  int iterations = 0;
  for (auto _ : state) {
    const auto sol = solve_regularized(cov, pen, lambda);
    iterations = sol.iterations;
    benchmark::DoNotOptimize(sol.objective);
  }
  state.counters["ipm_iters"] = iterations;
}
BENCHMARK(BM_SolveRegularized)->Arg(0)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Trial(benchmark::State& state) {
  bench::BenchConfig cfg;
  cfg.workers = 1;
  const bench::Harness harness(cfg);
  long i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(harness.run_trial(0.7, 0.1, i++).gap);
}
BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
