// Serial reference vs OpenMP kernel, one pair per hot loop.

#include "combi/kernels.hpp"
#include "combi/parallel.hpp"
#include "combi/partition.hpp"
#include "combi/ridge.hpp"
#include "combi/sampling.hpp"

#include <benchmark/benchmark.h>

using namespace combi;

namespace {

Eigen::MatrixXd normal(long r, long c, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd M(r, c);
  for (long j = 0; j < c; ++j)
    for (long i = 0; i < r; ++i) M(i, j) = rng.normal();
  return M;
}

Dataset multilabel_data(int m, int d, int features) {
  Dataset data;
  data.space = StructureSpace::multilabel(d);
  data.inputs = normal(m, features, 1);
  Rng rng(2);
  UniformSampler u = uniform_sampler_for(data.space);
  for (int i = 0; i < m; ++i) data.labels.push_back({u(rng)});
  return data;
}

void BM_gram(benchmark::State& st, bool parallel) {
  Eigen::MatrixXd X = normal(st.range(0), 20, 3);
  KernelSpec k = KernelSpec::rbf_kernel(0.1);
  for (auto _ : st) benchmark::DoNotOptimize(parallel ? gram_matrix(X, k) : gram_matrix_serial(X, k));
}

void BM_gradient(benchmark::State& st, bool parallel) {
  Dataset data = multilabel_data(static_cast<int>(st.range(0)), 20, 10);
  RidgeProblem p = make_problem(data, KernelSpec::linear_kernel(), 1.0, true, exact_stats(data.space));
  Eigen::MatrixXd a = normal(p.dim(), p.size(), 4);
  for (auto _ : st) benchmark::DoNotOptimize(parallel ? p.gradient(a) : p.gradient_serial(a));
}

void BM_enumerated_stats(benchmark::State& st, bool parallel) {
  StructureSpace s = StructureSpace::permutations(static_cast<int>(st.range(0)));
  auto all = enumerate_small(s);
  for (auto _ : st) benchmark::DoNotOptimize(parallel ? enumerated_stats(s, all) : enumerated_stats_serial(s, all));
}

void BM_exact_partition(benchmark::State& st, bool parallel) {
  StructureSpace s = StructureSpace::multilabel(static_cast<int>(st.range(0)));
  Eigen::VectorXd wx = 0.1 * normal(s.dim(), 1, 5).col(0);
  Tilt t{wx, max_embedding_norm(s) * wx.norm()};
  for (auto _ : st) benchmark::DoNotOptimize(parallel ? exact_partition(s, t) : exact_partition_serial(s, t));
}

void BM_fpras(benchmark::State& st, bool parallel) {
  StructureSpace s = StructureSpace::multilabel(8);
  Eigen::VectorXd wx = normal(8, 1, 6).col(0);
  wx /= wx.norm() * max_embedding_norm(s);
  Tilt t{wx, 1.0};
  FprasConfig cfg;
  cfg.samples_override = st.range(0);
  cfg.parallel = parallel;
  LevelSampler sampler = cftp_level_sampler(s, uniform_sampler_for(s));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_partition(s, t, cfg, sampler, Rng(7)).value);
}

}  // namespace

BENCHMARK_CAPTURE(BM_gram, serial, false)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_gram, parallel, true)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_gradient, serial, false)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_gradient, parallel, true)->Arg(200)->Arg(800);
BENCHMARK_CAPTURE(BM_enumerated_stats, serial, false)->Arg(7)->Arg(8);
BENCHMARK_CAPTURE(BM_enumerated_stats, parallel, true)->Arg(7)->Arg(8);
BENCHMARK_CAPTURE(BM_exact_partition, serial, false)->Arg(14)->Arg(18);
BENCHMARK_CAPTURE(BM_exact_partition, parallel, true)->Arg(14)->Arg(18);
BENCHMARK_CAPTURE(BM_fpras, serial, false)->Arg(500)->Arg(2000);
BENCHMARK_CAPTURE(BM_fpras, parallel, true)->Arg(500)->Arg(2000);

int main(int argc, char** argv) {
  apply_thread_cap();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
