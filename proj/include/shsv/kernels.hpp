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
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shsv {

/// Row-major dense matrix of doubles; one sample per row.
class DenseRows {
public:
    DenseRows() = default;
    DenseRows(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    explicit DenseRows(std::size_t cols) : cols_(cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    void push_back(std::span<const double> values);
    void push_back(std::span<const float> values);
    void reserve(std::size_t rows) { data_.reserve(rows * cols_); }
    void clear() noexcept {
        rows_ = 0;
        data_.clear();
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const DenseRows&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/**
 * Data-parallel inner loops.
 *
 * Every entry point exists twice: kernels::serial is the reference
 * implementation kept for testing, kernels::omp distributes independent output
 * elements over OpenMP threads. Each output element is computed by the same
 * scalar routine in both, so the two are bitwise identical. The unqualified
 * names dispatch to omp when the library is built with OpenMP.
 */
namespace kernels {

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double rbf(std::span<const double> a, std::span<const double> b, double gamma) noexcept;

/// out[k] = |a[k] - b[k]| evaluated in double.
void absolute_difference(std::span<const float> a, std::span<const float> b, std::span<double> out) noexcept;

#define SHSV_KERNEL_DECLS                                                                                         \
    /* out[j] = exp(-gamma * |x_j - query|^2) */                                                                  \
    void rbf_row(const DenseRows& x, std::span<const double> query, double gamma, std::span<double> out);         \
    /* out[i] = w . x_i + b */                                                                                    \
    void linear_decisions(const DenseRows& x, std::span<const double> w, double b, std::span<double> out);        \
    /* out[q] = sum_s coef_s * exp(-gamma * |sv_s - query_q|^2) + b */                                            \
    void rbf_decisions(const DenseRows& sv, std::span<const double> coef, double b, double gamma,                 \
                       const DenseRows& queries, std::span<double> out);                                          \
    /* out.row(i) = |left[i] - right[i]| */                                                                       \
    void dissimilarity_rows(std::span<const std::span<const float>> left,                                        \
                            std::span<const std::span<const float>> right, DenseRows& out);

namespace serial {
SHSV_KERNEL_DECLS
}  // namespace serial

namespace omp {
SHSV_KERNEL_DECLS
}  // namespace omp

SHSV_KERNEL_DECLS

#undef SHSV_KERNEL_DECLS

/// Number of worker threads the omp kernels will use (1 without OpenMP).
int thread_count() noexcept;

}  // namespace kernels
}  // namespace shsv
