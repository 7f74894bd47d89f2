#include <benchmark/benchmark.h>

#include "mpspec/clt.hpp"
#include "mpspec/estimators.hpp"
#include "mpspec/kernels.hpp"
#include "mpspec/mp_law.hpp"
#include "mpspec/spectral.hpp"

using namespace mpspec;

static void BM_Eigenvalues(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd s = sample_covariance(sample_data_matrix(p, 2 * p, 7));
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigenvalues(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Eigenvalues)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_SampleCovariance(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto x = sample_data_matrix(p, 2 * p, 7);
  for (auto _ : state) benchmark::DoNotOptimize(sample_covariance(x));
}
BENCHMARK(BM_SampleCovariance)->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Stieltjes(benchmark::State& state) {
  const MpLaw law(0.5);
  double u = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(law.stieltjes(Complex(u, 0.01)));
    u = u > 3.0 ? 0.1 : u + 1e-3;
  }
}
BENCHMARK(BM_Stieltjes);

static void BM_MpCdf(benchmark::State& state) {
  const MpLaw law(0.5);
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(law.cdf(x));
    x = x > 2.9 ? 0.1 : x + 1e-3;
  }
}
BENCHMARK(BM_MpCdf);

static void BM_SmoothedCdf(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const auto sample = SpectralSample::from_data(sample_data_matrix(p, 2 * p, 11));
  const auto kernel = gaussian_kernel();
  const double h = bandwidth_for_cdf(2 * p);
  for (auto _ : state) benchmark::DoNotOptimize(smoothed_cdf(sample, kernel, h, 1.0));
}
BENCHMARK(BM_SmoothedCdf)->Arg(500)->Arg(2000);

static void BM_SmoothedQuantile(benchmark::State& state) {
  const auto sample = SpectralSample::from_data(sample_data_matrix(500, 1000, 11));
  const auto kernel = gaussian_kernel();
  const double h = bandwidth_for_cdf(1000);
  for (auto _ : state) benchmark::DoNotOptimize(smoothed_quantile(sample, kernel, h, 0.5));
}
BENCHMARK(BM_SmoothedQuantile);

static void BM_Sigma2(benchmark::State& state) {
  const auto kernel = gaussian_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(sigma_squared(kernel));
}
BENCHMARK(BM_Sigma2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
