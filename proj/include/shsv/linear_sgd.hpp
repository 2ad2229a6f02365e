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
#include <span>
#include <vector>

#include "shsv/dissimilarity.hpp"
#include "shsv/kernels.hpp"

namespace shsv {

struct SgdParams {
    double reg = 1e-4;  // C in the primal objective
    double lr0 = 1e-2;
    double lr_t0 = 0.0;  // <= 0: set to 10 * (dev-set size) by the first fit_batch
};

/**
 * Linear hinge-loss classifier trained in the primal by SGD.
 *
 * Decision: w . x + b, positive (same writer) is +1. Per-sample step t uses
 * eta_t = lr0 / (1 + t / lr_t0) and the subgradient
 *     dw = C w - [y (w.x + b) < 1] y x,   db = -[y (w.x + b) < 1] y.
 * The bias is not regularised.
 */
class LinearModel {
public:
    LinearModel() = default;
    LinearModel(std::size_t dim, const SgdParams& params);

    std::size_t dim() const noexcept { return w_.size(); }
    std::span<const double> weights() const noexcept { return w_; }
    std::span<double> weights() noexcept { return w_; }
    double bias() const noexcept { return b_; }
    void set_bias(double b) noexcept { b_ = b; }
    std::uint64_t step_count() const noexcept { return steps_; }
    double reg() const noexcept { return reg_; }
    double lr0() const noexcept { return lr0_; }
    double lr_t0() const noexcept { return lr_t0_; }
    void set_lr_t0(double v) noexcept { lr_t0_ = v; }

    double learning_rate() const noexcept;
    double decision(std::span<const double> x) const;
    void decisions(const DenseRows& x, std::span<double> out) const;

    /// One SGD step on a single sample.
    void step(std::span<const double> x, double y);

    bool operator==(const LinearModel&) const = default;

    friend void save_linear_model(const LinearModel&, const std::filesystem::path&);
    friend LinearModel load_linear_model(const std::filesystem::path&);

private:
    std::vector<double> w_;
    double b_ = 0.0;
    std::uint64_t steps_ = 0;
    double reg_ = 1e-4;
    double lr0_ = 1e-2;
    double lr_t0_ = 0.0;
};

/// (C/2)|w|^2 + mean hinge loss over the batch.
double objective(const LinearModel& model, std::span<const DissimilaritySample> batch);

struct Subgradient {
    std::vector<double> w;
    double b = 0.0;
};

/// Full-batch subgradient of objective(); exact wherever no sample sits on the margin.
Subgradient subgradient(const LinearModel& model, std::span<const DissimilaritySample> batch);

/// `epochs` shuffled passes over the dev set. Throws NumericalError on a non-finite update.
LinearModel fit_batch(LinearModel model, const DevSet& dev, int epochs, std::uint64_t seed);

/// One pass over `batch`, continuing the step counter. shuffle=false keeps the given order.
LinearModel partial_fit(LinearModel model, std::span<const DissimilaritySample> batch, std::uint64_t seed,
                        bool shuffle = true);

// "SHWM" | version u32 | dim u32 | steps u64 | C f64 | lr0 f64 | lr_t0 f64 | b f64 | dim x f64
void save_linear_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_linear_model(const std::filesystem::path& path);

}  // namespace shsv
