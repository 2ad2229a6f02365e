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
#include "shsv/linear_sgd.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "binio.hpp"
#include "shsv/errors.hpp"
#include "shsv/rng.hpp"

namespace shsv {

namespace {

constexpr std::uint32_t kModelVersion = 1;

void check_dim(const LinearModel& m, std::size_t d) {
    if (m.dim() != d) {
        throw DataError(fmt::format("linear model dim {} does not match sample dim {}", m.dim(), d));
    }
}

}  // namespace

LinearModel::LinearModel(std::size_t dim, const SgdParams& params)
    : w_(dim, 0.0), reg_(params.reg), lr0_(params.lr0), lr_t0_(params.lr_t0) {
    if (dim == 0) {
        throw ConfigError("linear model dim must be >= 1");
    }
    if (!(params.reg > 0) || !(params.lr0 > 0)) {
        throw ConfigError("sgd: reg and lr0 must be positive");
    }
}

double LinearModel::learning_rate() const noexcept {
    const double t0 = lr_t0_ > 0 ? lr_t0_ : 1.0;
    return lr0_ / (1.0 + static_cast<double>(steps_) / t0);
}

double LinearModel::decision(std::span<const double> x) const {
    check_dim(*this, x.size());
    return kernels::dot(w_, x) + b_;
}

void LinearModel::decisions(const DenseRows& x, std::span<double> out) const {
    check_dim(*this, x.cols());
    kernels::linear_decisions(x, w_, b_, out);
}

void LinearModel::step(std::span<const double> x, double y) {
    check_dim(*this, x.size());
    const double eta = learning_rate();
    const bool violated = y * (kernels::dot(w_, x) + b_) < 1.0;
    const double shrink = 1.0 - eta * reg_;
    double check = 0.0;
    if (violated) {
        for (std::size_t k = 0; k < w_.size(); ++k) {
            w_[k] = shrink * w_[k] + eta * y * x[k];
            check += w_[k];
        }
        b_ += eta * y;
    } else {
        for (auto& wk : w_) {
            wk *= shrink;
            check += wk;
        }
    }
    ++steps_;
    // NaN or Inf anywhere in w propagates into the sum.
    if (!std::isfinite(b_) || !std::isfinite(check)) {
        throw NumericalError(fmt::format("sgd: non-finite parameters after step {} (eta = {}); lower lr0", steps_, eta));
    }
}

double objective(const LinearModel& model, std::span<const DissimilaritySample> batch) {
    if (batch.empty()) {
        throw DataError("objective: empty batch");
    }
    const auto w = model.weights();
    double hinge = 0.0;
    for (const auto& s : batch) {
        const double margin = label_sign(s.label) * model.decision(s.dvec);
        hinge += std::max(0.0, 1.0 - margin);
    }
    return 0.5 * model.reg() * kernels::dot(w, w) + hinge / static_cast<double>(batch.size());
}

Subgradient subgradient(const LinearModel& model, std::span<const DissimilaritySample> batch) {
    if (batch.empty()) {
        throw DataError("subgradient: empty batch");
    }
    Subgradient g;
    const auto w = model.weights();
    g.w.assign(w.begin(), w.end());
    for (auto& v : g.w) {
        v *= model.reg();
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& s : batch) {
        const double y = label_sign(s.label);
        if (y * model.decision(s.dvec) < 1.0) {
            for (std::size_t k = 0; k < g.w.size(); ++k) {
                g.w[k] -= inv_n * y * s.dvec[k];
            }
            g.b -= inv_n * y;
        }
    }
    return g;
}

LinearModel fit_batch(LinearModel model, const DevSet& dev, int epochs, std::uint64_t seed) {
    if (dev.samples.empty()) {
        throw DataError("fit_batch: empty development set");
    }
    check_dim(model, dev.samples.front().dvec.size());
    if (model.lr_t0() <= 0) {
        model.set_lr_t0(10.0 * static_cast<double>(dev.samples.size()));
    }
    Rng rng(seed);
    std::vector<std::size_t> order(dev.samples.size());
    for (int e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (auto i : order) {
            const auto& s = dev.samples[i];
            model.step(s.dvec, label_sign(s.label));
        }
    }
    return model;
}

LinearModel partial_fit(LinearModel model, std::span<const DissimilaritySample> batch, std::uint64_t seed,
                        bool shuffle) {
    if (batch.empty()) {
        return model;
    }
    check_dim(model, batch.front().dvec.size());
    if (model.lr_t0() <= 0) {
        model.set_lr_t0(10.0 * static_cast<double>(batch.size()));
    }
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (shuffle) {
        Rng rng(seed);
        rng.shuffle(order);
    }
    for (auto i : order) {
        model.step(batch[i].dvec, label_sign(batch[i].label));
    }
    return model;
}

void save_linear_model(const LinearModel& m, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.bytes("SHWM", 4);
    w.put<std::uint32_t>(kModelVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.dim()));
    w.put<std::uint64_t>(m.steps_);
    w.put<double>(m.reg_);
    w.put<double>(m.lr0_);
    w.put<double>(m.lr_t0_);
    w.put<double>(m.b_);
    for (double v : m.w_) {
        w.put<double>(v);
    }
    w.write_to(path.string());
}

LinearModel load_linear_model(const std::filesystem::path& path) {
    detail::ByteReader in(path.string());
    char magic[4];
    in.bytes(magic, 4, "magic");
    if (std::memcmp(magic, "SHWM", 4) != 0) {
        throw DataError("'" + path.string() + "' is not a linear model checkpoint (bad magic)");
    }
    if (const auto v = in.get<std::uint32_t>("version"); v != kModelVersion) {
        throw DataError(fmt::format("'{}': unsupported checkpoint version {}", path.string(), v));
    }
    const auto dim = in.get<std::uint32_t>("dim");
    LinearModel m;
    m.steps_ = in.get<std::uint64_t>("step_count");
    m.reg_ = in.get<double>("C");
    m.lr0_ = in.get<double>("lr0");
    m.lr_t0_ = in.get<double>("lr_t0");
    m.b_ = in.get<double>("bias");
    m.w_.resize(dim);
    in.bytes(m.w_.data(), dim * sizeof(double), "weights");
    return m;
}

}  // namespace shsv
