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
#include "shsv/kernels.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#ifdef SHSV_WITH_OPENMP
#include <omp.h>
#endif

namespace shsv {

void DenseRows::push_back(std::span<const double> values) {
    if (values.size() != cols_) {
        throw std::invalid_argument("DenseRows::push_back: column count mismatch");
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void DenseRows::push_back(std::span<const float> values) {
    if (values.size() != cols_) {
        throw std::invalid_argument("DenseRows::push_back: column count mismatch");
    }
    for (float v : values) {
        data_.push_back(static_cast<double>(v));
    }
    ++rows_;
}

namespace kernels {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += a[k] * b[k];
    }
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double rbf(std::span<const double> a, std::span<const double> b, double gamma) noexcept {
    return std::exp(-gamma * squared_distance(a, b));
}

void absolute_difference(std::span<const float> a, std::span<const float> b, std::span<double> out) noexcept {
    for (std::size_t k = 0; k < a.size(); ++k) {
        out[k] = std::fabs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
    }
}

namespace {

double rbf_expansion(const DenseRows& sv, std::span<const double> coef, double b, double gamma,
                     std::span<const double> q) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < sv.rows(); ++i) {
        s += coef[i] * rbf(sv.row(i), q, gamma);
    }
    return s + b;
}

void check_rows(const DenseRows& out, std::size_t rows, std::size_t cols) {
    if (out.rows() != rows || out.cols() != cols) {
        throw std::invalid_argument("dissimilarity_rows: output shape mismatch");
    }
}

}  // namespace

namespace serial {

void rbf_row(const DenseRows& x, std::span<const double> query, double gamma, std::span<double> out) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
        out[j] = rbf(x.row(j), query, gamma);
    }
}

void linear_decisions(const DenseRows& x, std::span<const double> w, double b, std::span<double> out) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        out[i] = dot(w, x.row(i)) + b;
    }
}

void rbf_decisions(const DenseRows& sv, std::span<const double> coef, double b, double gamma,
                   const DenseRows& queries, std::span<double> out) {
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        out[q] = rbf_expansion(sv, coef, b, gamma, queries.row(q));
    }
}

void dissimilarity_rows(std::span<const std::span<const float>> left, std::span<const std::span<const float>> right,
                        DenseRows& out) {
    check_rows(out, left.size(), left.empty() ? out.cols() : left[0].size());
    for (std::size_t i = 0; i < left.size(); ++i) {
        absolute_difference(left[i], right[i], out.row(i));
    }
}

}  // namespace serial

namespace omp {

void rbf_row(const DenseRows& x, std::span<const double> query, double gamma, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        out[j] = rbf(x.row(j), query, gamma);
    }
}

void linear_decisions(const DenseRows& x, std::span<const double> w, double b, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = dot(w, x.row(i)) + b;
    }
}

void rbf_decisions(const DenseRows& sv, std::span<const double> coef, double b, double gamma,
                   const DenseRows& queries, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t q = 0; q < n; ++q) {
        out[q] = rbf_expansion(sv, coef, b, gamma, queries.row(q));
    }
}

void dissimilarity_rows(std::span<const std::span<const float>> left, std::span<const std::span<const float>> right,
                        DenseRows& out) {
    check_rows(out, left.size(), left.empty() ? out.cols() : left[0].size());
    const auto n = static_cast<std::ptrdiff_t>(left.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        absolute_difference(left[i], right[i], out.row(i));
    }
}

}  // namespace omp

#ifdef SHSV_WITH_OPENMP
namespace active = omp;
#else
namespace active = serial;
#endif

void rbf_row(const DenseRows& x, std::span<const double> query, double gamma, std::span<double> out) {
    active::rbf_row(x, query, gamma, out);
}

void linear_decisions(const DenseRows& x, std::span<const double> w, double b, std::span<double> out) {
    active::linear_decisions(x, w, b, out);
}

void rbf_decisions(const DenseRows& sv, std::span<const double> coef, double b, double gamma,
                   const DenseRows& queries, std::span<double> out) {
    active::rbf_decisions(sv, coef, b, gamma, queries, out);
}

void dissimilarity_rows(std::span<const std::span<const float>> left, std::span<const std::span<const float>> right,
                        DenseRows& out) {
    active::dissimilarity_rows(left, right, out);
}

int thread_count() noexcept {
#ifdef SHSV_WITH_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace kernels
}  // namespace shsv
