// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>

#include "drel/kernels.hpp"

namespace {

using namespace drel::kernels;

IntMatrix random_annotation(Eigen::Index n) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> conf(1, 5);
  std::bernoulli_distribution on(0.15);
  IntMatrix a = IntMatrix::Zero(n, 15);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = conf(gen);
    for (Eigen::Index j = 0; j < 15; ++j) a(i, j) = on(gen) ? c : 0;
  }
  return a;
}

struct ClmData {
  Matrix x;
  std::vector<int> y;
  Vector thresholds{{-2.0, -0.5, 0.5, 2.0}};
  Vector beta{{0.3, -0.2}};
};

ClmData random_clm(Eigen::Index n) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> cat(1, 5);
  std::bernoulli_distribution on(0.3);
  ClmData d;
  d.x = Matrix::Zero(n, 2);
  d.y.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    d.x(i, 0) = on(gen) ? 1.0 : 0.0;
    d.x(i, 1) = on(gen) ? 1.0 : 0.0;
    d.y[static_cast<std::size_t>(i)] = cat(gen);
  }
  return d;
}

void BM_CooccurrenceSerial(benchmark::State& s) {
  const auto a = random_annotation(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(serial::cooccurrence(a));
}
void BM_CooccurrenceOmp(benchmark::State& s) {
  const auto a = random_annotation(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(omp::cooccurrence(a));
}

void BM_DistancesSerial(benchmark::State& s) {
  const Matrix p = Matrix::Random(s.range(0), 10);
  for (auto _ : s) benchmark::DoNotOptimize(serial::pairwise_distances(p));
}
void BM_DistancesOmp(benchmark::State& s) {
  const Matrix p = Matrix::Random(s.range(0), 10);
  for (auto _ : s) benchmark::DoNotOptimize(omp::pairwise_distances(p));
}

void BM_ClmSerial(benchmark::State& s) {
  const auto d = random_clm(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(serial::clm_accumulate(d.x, d.y, d.thresholds, d.beta));
}
void BM_ClmOmp(benchmark::State& s) {
  const auto d = random_clm(s.range(0));
  for (auto _ : s) benchmark::DoNotOptimize(omp::clm_accumulate(d.x, d.y, d.thresholds, d.beta));
}

}  // namespace

BENCHMARK(BM_CooccurrenceSerial)->Arg(1000)->Arg(100000);
BENCHMARK(BM_CooccurrenceOmp)->Arg(1000)->Arg(100000);
BENCHMARK(BM_DistancesSerial)->Arg(50)->Arg(500);
BENCHMARK(BM_DistancesOmp)->Arg(50)->Arg(500);
BENCHMARK(BM_ClmSerial)->Arg(2000)->Arg(200000);
BENCHMARK(BM_ClmOmp)->Arg(2000)->Arg(200000);

BENCHMARK_MAIN();
