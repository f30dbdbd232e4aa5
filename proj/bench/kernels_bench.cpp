// Serial reference kernels against their OpenMP counterparts on synthetic piece sets.

#include <benchmark/benchmark.h>

#include "twqp/gen.hpp"
#include "twqp/oracle.hpp"
#include "twqp/pruning.hpp"
#include "twqp/solver.hpp"

using namespace twqp;

namespace {

PiecewiseQuad make_pieces(int dim, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> coords(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) coords[static_cast<std::size_t>(i)] = i;
  PiecewiseQuad f(coords);
  for (std::size_t s = 0; s < count; ++s) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = rng.uniform(-1, 1);
    Eigen::VectorXd b(dim);
    for (int i = 0; i < dim; ++i) b(i) = rng.uniform(-5, 5);
    f.push_back({coords, m.transpose() * m + Eigen::MatrixXd::Identity(dim, dim), b, rng.uniform(-20, 20)});
  }
  return f;
}

void BM_EliminateSerial(benchmark::State& st) {
  auto f = make_pieces(4, static_cast<std::size_t>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::eliminate_serial(f, 0, 0.5, true));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_EliminateParallel(benchmark::State& st) {
  auto f = make_pieces(4, static_cast<std::size_t>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::eliminate_parallel(f, 0, 0.5, true));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

struct CombineSetup {
  QuadPiece h;
  PiecewiseQuad g1, g2;
  QuadPiece phi1, phi2;
  std::vector<ParentTerm> parents;

  explicit CombineSetup(std::size_t count) {
    auto hf = make_pieces(3, 1, 2);
    h = hf.piece(0);
    g1 = make_pieces(3, count, 3);
    g2 = make_pieces(3, 8, 4);
    phi1 = make_pieces(3, 1, 5).piece(0);
    phi2 = make_pieces(3, 1, 6).piece(0);
    parents = {{&g1, &phi1}, {&g2, &phi2}};
  }
};

void BM_CombineSerial(benchmark::State& st) {
  CombineSetup s(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::combine_serial(s.h, s.parents));
}

void BM_CombineParallel(benchmark::State& st) {
  CombineSetup s(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::combine_parallel(s.h, s.parents));
}

void BM_PruneSerial(benchmark::State& st) {
  auto f = make_pieces(3, static_cast<std::size_t>(st.range(0)), 7);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::prune_exact_serial(f, 2.0));
}

void BM_PruneParallel(benchmark::State& st) {
  auto f = make_pieces(3, static_cast<std::size_t>(st.range(0)), 7);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::prune_exact_parallel(f, 2.0));
}

void BM_MinimizeFirstSerial(benchmark::State& st) {
  auto f = make_pieces(3, static_cast<std::size_t>(st.range(0)), 8);
  const std::vector<double> rest{0.3, -0.7};
  for (auto _ : st) benchmark::DoNotOptimize(kernels::minimize_first_serial(f, rest, 0.5, true));
}

void BM_MinimizeFirstParallel(benchmark::State& st) {
  auto f = make_pieces(3, static_cast<std::size_t>(st.range(0)), 8);
  const std::vector<double> rest{0.3, -0.7};
  for (auto _ : st) benchmark::DoNotOptimize(kernels::minimize_first_parallel(f, rest, 0.5, true));
}

void BM_OracleSerial(benchmark::State& st) {
  auto g = gen_banded(static_cast<int>(st.range(0)), 2, 1.0, 9);
  for (auto _ : st) benchmark::DoNotOptimize(brute_force(g.instance, Exec::serial));
}

void BM_OracleParallel(benchmark::State& st) {
  auto g = gen_banded(static_cast<int>(st.range(0)), 2, 1.0, 9);
  for (auto _ : st) benchmark::DoNotOptimize(brute_force(g.instance, Exec::parallel));
}

void BM_SolveBanded(benchmark::State& st) {
  GenSpec spec;
  spec.n = static_cast<int>(st.range(0));
  spec.w = 2;
  spec.target_kappa = 7;
  spec.seed = 10;
  auto g = generate(spec);
  SolveOptions opts;
  opts.exec = st.range(1) == 0 ? Exec::serial : Exec::parallel;
  const PreparedProblem prep = prepare(g.instance, {}, opts);
  for (auto _ : st) benchmark::DoNotOptimize(solve(prep.instance, prep.ld, prep.U, opts));
}

}  // namespace

BENCHMARK(BM_EliminateSerial)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_EliminateParallel)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);
BENCHMARK(BM_CombineSerial)->Arg(128)->Arg(2048);
BENCHMARK(BM_CombineParallel)->Arg(128)->Arg(2048);
BENCHMARK(BM_PruneSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_PruneParallel)->Arg(256)->Arg(2048);
BENCHMARK(BM_MinimizeFirstSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_MinimizeFirstParallel)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_OracleSerial)->Arg(12)->Arg(16);
BENCHMARK(BM_OracleParallel)->Arg(12)->Arg(16);
BENCHMARK(BM_SolveBanded)->Args({2000, 0})->Args({2000, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
