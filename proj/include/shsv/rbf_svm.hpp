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

#include <cstdint>
#include <filesystem>
#include <list>
#include <span>
#include <vector>

#include "shsv/dissimilarity.hpp"
#include "shsv/kernels.hpp"

namespace shsv {

inline constexpr double kDefaultRbfGamma = 1.0 / 2048.0;  // 2^-11

double rbf(std::span<const double> x1, std::span<const double> x2, double gamma);

/// Static RBF-kernel SVM: f(x) = sum_i alpha_i y_i K(sv_i, x) + b.
struct KernelModel {
    DenseRows support_vectors;
    std::vector<double> alpha_y;
    double b = 0.0;
    double gamma = kDefaultRbfGamma;
    double C = 1.0;

    std::size_t dim() const noexcept { return support_vectors.cols(); }
    double decision(std::span<const double> x) const;
    void decisions(const DenseRows& x, std::span<double> out) const;

    bool operator==(const KernelModel&) const = default;
};

struct SmoParams {
    double C = 1.0;
    double gamma = kDefaultRbfGamma;
    double tol = 1e-3;
    std::size_t max_passes = 0;  // 0: 10 * N
    std::uint64_t seed = 1;
    std::size_t cache_mb = 256;
    bool record_dual_trace = false;
};

struct SmoResult {
    KernelModel model;
    std::vector<double> alpha;  // one per training sample, in input order
    bool converged = false;     // false: pass budget ran out, model is the last iterate
    std::size_t passes = 0;
    std::size_t updates = 0;
    double dual_objective = 0.0;
    std::vector<double> dual_trace;  // objective after each accepted pair update
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

/**
 * Memory-bounded LRU cache of kernel rows K(x_i, .).
 *
 * A returned span stays valid until two further distinct rows have been
 * requested; the capacity is never below two rows.
 */
class KernelRowCache {
public:
    KernelRowCache(const DenseRows& x, double gamma, std::size_t budget_bytes);

    std::span<const double> row(std::size_t i);

    std::size_t capacity_rows() const noexcept { return capacity_; }
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    const DenseRows& x_;
    double gamma_;
    std::size_t capacity_;
    std::vector<std::vector<double>> slots_;
    std::vector<std::size_t> owner_;                 // slot -> row
    std::vector<std::ptrdiff_t> slot_of_;            // row -> slot or -1
    std::list<std::size_t> lru_;                     // slots, most recent first
    std::vector<std::list<std::size_t>::iterator> where_;  // slot -> position in lru_
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/**
 * Soft-margin SVM by sequential minimal optimisation.
 *
 * Outer loop alternates full passes and passes over the non-bound
 * multipliers; each violator of the KKT conditions at `tol` is paired first
 * with the non-bound index maximising |E_i - E_j|, then with non-bound and
 * finally all indices from a seeded random start. Errors are cached for
 * every sample. When no multiplier ends strictly inside (0, C) the bias is
 * set to the midpoint of its feasible KKT interval.
 */
SmoResult fit_smo(const DenseRows& x, std::span<const double> y, const SmoParams& params);
SmoResult fit_smo(const DevSet& dev, const SmoParams& params);

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double dual_objective(const DenseRows& x, std::span<const double> y, std::span<const double> alpha, double gamma);

struct KktReport {
    bool ok = true;
    double max_violation = 0.0;
    std::size_t violators = 0;
    double equality_residual = 0.0;  // |sum alpha_i y_i|
};

/// Recomputes f from scratch and checks the box, equality and KKT conditions.
KktReport kkt_audit(const DenseRows& x, std::span<const double> y, std::span<const double> alpha, double b,
                    double gamma, double C, double tol);

DenseRows rows_of(const DevSet& dev);
std::vector<double> labels_of(const DevSet& dev);

// "SHKM" | version u32 | dim u32 | sv_count u32 | gamma f64 | C f64 | b f64 | per SV: alpha_y f64, dim x f32
void save_kernel_model(const KernelModel& model, const std::filesystem::path& path);
KernelModel load_kernel_model(const std::filesystem::path& path);

}  // namespace shsv
