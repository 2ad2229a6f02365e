/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
// Serial reference kernels against their OpenMP counterparts.

#include <vector>

#include <benchmark/benchmark.h>

#include "shsv/kernels.hpp"
#include "shsv/rng.hpp"

namespace {

shsv::DenseRows random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    shsv::Rng rng(seed);
    shsv::DenseRows m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : m.row(i)) {
            v = rng.normal();
        }
    }
    return m;
}

constexpr std::size_t kDim = 64;

template <auto Kernel>
void bm_rbf_row(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_rows(n, kDim, 1);
    const auto q = random_rows(1, kDim, 2);
    std::vector<double> out(n);
    for (auto _ : state) {
        Kernel(x, q.row(0), 1.0 / 2048.0, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <auto Kernel>
void bm_rbf_decisions(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto sv = random_rows(n, kDim, 3);
    const auto queries = random_rows(240, kDim, 4);
    std::vector<double> coef(n, 0.5), out(queries.rows());
    for (auto _ : state) {
        Kernel(sv, coef, 0.1, 1.0 / 2048.0, queries, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * queries.rows()));
}

template <auto Kernel>
void bm_linear_decisions(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_rows(n, kDim, 5);
    const auto w = random_rows(1, kDim, 6);
    std::vector<double> out(n);
    for (auto _ : state) {
        Kernel(x, w.row(0), 0.25, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <auto Kernel>
void bm_dissimilarity_rows(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    shsv::Rng rng(7);
    std::vector<std::vector<float>> a(n, std::vector<float>(kDim)), b(n, std::vector<float>(kDim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < kDim; ++k) {
            a[i][k] = static_cast<float>(rng.normal());
            b[i][k] = static_cast<float>(rng.normal());
        }
    }
    std::vector<std::span<const float>> left(a.begin(), a.end()), right(b.begin(), b.end());
    shsv::DenseRows out(kDim);
    for (auto _ : state) {
        Kernel(left, right, out);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

namespace k = shsv::kernels;

BENCHMARK(bm_rbf_row<k::serial::rbf_row>)->Name("rbf_row/serial")->Arg(1024)->Arg(8192);
BENCHMARK(bm_rbf_row<k::omp::rbf_row>)->Name("rbf_row/omp")->Arg(1024)->Arg(8192);
BENCHMARK(bm_rbf_decisions<k::serial::rbf_decisions>)->Name("rbf_decisions/serial")->Arg(256)->Arg(2048);
BENCHMARK(bm_rbf_decisions<k::omp::rbf_decisions>)->Name("rbf_decisions/omp")->Arg(256)->Arg(2048);
BENCHMARK(bm_linear_decisions<k::serial::linear_decisions>)->Name("linear_decisions/serial")->Arg(4096);
BENCHMARK(bm_linear_decisions<k::omp::linear_decisions>)->Name("linear_decisions/omp")->Arg(4096);
BENCHMARK(bm_dissimilarity_rows<k::serial::dissimilarity_rows>)->Name("dissimilarity_rows/serial")->Arg(4096);
BENCHMARK(bm_dissimilarity_rows<k::omp::dissimilarity_rows>)->Name("dissimilarity_rows/omp")->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
