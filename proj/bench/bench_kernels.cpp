// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include "projlens/kernels.hpp"
#include "projlens/pursuit.hpp"
#include "projlens/rng.hpp"

#include <benchmark/benchmark.h>

using namespace projlens;

namespace {

RowMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  return m;
}

template <RowMatrix (*F)(const RowMatrix&)>
void BM_matrix(benchmark::State& state) {
  const RowMatrix v = gaussian(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(F(v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <std::vector<double> (*F)(const RowMatrix&, const Vector&)>
void BM_cosine(benchmark::State& state) {
  const RowMatrix v = gaussian(static_cast<std::size_t>(state.range(0)), 4096, 2);
  const Vector t = gaussian(4096, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(F(v, t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <std::vector<std::size_t> (*F)(const BinaryMask&, const PatchGrid&)>
void BM_coverage(benchmark::State& state) {
  const PatchGrid g{24, 24, 14};
  BinaryMask m(g.input_h(), g.input_w());
  Rng rng(4);
  for (std::size_t r = 0; r < m.height(); ++r)
    for (std::size_t c = 0; c < m.width(); ++c) m.set(r, c, rng.uniform() < 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(F(m, g));
}

template <bool Parallel>
void BM_tokenmap(benchmark::State& state) {
  const std::size_t vocab_size = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vocab_size; ++i) names.push_back("t" + std::to_string(i));
  const VocabTable vocab(names, DenseMatrix(gaussian(vocab_size, 256, 5)));
  const DenseMatrix v(gaussian(576, 256, 6));
  const PursuitOptions opts{.k = 5};
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(tokenmap(v, vocab, opts));
    } else {
      benchmark::DoNotOptimize(tokenmap_serial(v, vocab, opts));
    }
  }
}

}  // namespace

BENCHMARK(BM_matrix<kernels::second_moment_serial>)->Name("second_moment/serial")->Args({576, 1024})->Args({4096, 256});
BENCHMARK(BM_matrix<kernels::second_moment>)->Name("second_moment/omp")->Args({576, 1024})->Args({4096, 256});
BENCHMARK(BM_matrix<kernels::gram_serial>)->Name("gram/serial")->Args({576, 1024});
BENCHMARK(BM_matrix<kernels::gram>)->Name("gram/omp")->Args({576, 1024});
BENCHMARK(BM_cosine<kernels::cosine_rows_serial>)->Name("cosine_rows/serial")->Arg(576)->Arg(4096);
BENCHMARK(BM_cosine<kernels::cosine_rows>)->Name("cosine_rows/omp")->Arg(576)->Arg(4096);
BENCHMARK(BM_coverage<kernels::coverage_counts_serial>)->Name("coverage_counts/serial");
BENCHMARK(BM_coverage<kernels::coverage_counts>)->Name("coverage_counts/omp");
BENCHMARK(BM_tokenmap<false>)->Name("tokenmap/serial")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tokenmap<true>)->Name("tokenmap/omp")->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
