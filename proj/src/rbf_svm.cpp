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
#include "shsv/rbf_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "binio.hpp"
#include "shsv/errors.hpp"
#include "shsv/rng.hpp"

namespace shsv {

namespace {

constexpr std::uint32_t kModelVersion = 1;

void check_dim(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw DataError(fmt::format("kernel model dim {} does not match sample dim {}", expected, got));
    }
}

class SmoSolver {
public:
    SmoSolver(const DenseRows& x, std::span<const double> y, const SmoParams& p)
        : x_(x),
          y_(y),
          p_(p),
          n_(x.rows()),
          cache_(x, p.gamma, p.cache_mb * 1024 * 1024),
          rng_(p.seed),
          alpha_(n_, 0.0),
          error_(n_) {
        for (std::size_t i = 0; i < n_; ++i) {
            error_[i] = -y_[i];
        }
    }

    SmoResult run() {
        const std::size_t max_passes = p_.max_passes > 0 ? p_.max_passes : 10 * n_;
        bool examine_all = true;
        std::size_t changed = 0;
        SmoResult res;
        while ((changed > 0 || examine_all) && res.passes < max_passes) {
            changed = 0;
            const std::size_t start = static_cast<std::size_t>(rng_.below(n_));
            for (std::size_t k = 0; k < n_; ++k) {
                const std::size_t i = (start + k) % n_;
                if (examine_all || is_free(i)) {
                    changed += examine(i) ? 1 : 0;
                }
            }
            ++res.passes;
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        // Normal exit only follows a full pass without a single update.
        res.converged = changed == 0 && !examine_all;
        if (free_count_ == 0) {
            settle_bias();
        }

        res.alpha = alpha_;
        res.updates = updates_;
        res.dual_objective = dual_;
        res.dual_trace = std::move(trace_);
        res.cache_hits = cache_.hits();
        res.cache_misses = cache_.misses();
        res.model.gamma = p_.gamma;
        res.model.C = p_.C;
        res.model.b = b_;
        res.model.support_vectors = DenseRows(x_.cols());
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] > 0.0) {
                res.model.support_vectors.push_back(x_.row(i));
                res.model.alpha_y.push_back(alpha_[i] * y_[i]);
            }
        }
        return res;
    }

private:
    bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < p_.C; }

    bool examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alpha_[i2];
        const double e2 = error_[i2];
        const double r2 = e2 * y2;
        if (!((r2 < -p_.tol && a2 < p_.C) || (r2 > p_.tol && a2 > 0.0))) {
            return false;
        }
        if (free_count_ > 1) {
            std::size_t best = n_;
            double best_gap = -1.0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (is_free(i)) {
                    const double gap = std::fabs(error_[i] - e2);
                    if (gap > best_gap) {
                        best_gap = gap;
                        best = i;
                    }
                }
            }
            if (best < n_ && take_step(best, i2)) {
                return true;
            }
        }
        const std::size_t start = static_cast<std::size_t>(rng_.below(n_));
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start + k) % n_;
            if (is_free(i1) && take_step(i1, i2)) {
                return true;
            }
        }
        const std::size_t start_all = static_cast<std::size_t>(rng_.below(n_));
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start_all + k) % n_;
            if (!is_free(i1) && take_step(i1, i2)) {
                return true;
            }
        }
        return false;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) {
            return false;
        }
        const double C = p_.C;
        const double a1_old = alpha_[i1];
        const double a2_old = alpha_[i2];
        const double y1 = y_[i1];
        const double y2 = y_[i2];
        const double e1 = error_[i1];
        const double e2 = error_[i2];
        const double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(C, C + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - C);
            hi = std::min(C, a1_old + a2_old);
        }
        if (!(lo < hi)) {
            return false;
        }
        const auto row1 = cache_.row(i1);
        const auto row2 = cache_.row(i2);
        const double k11 = row1[i1];
        const double k12 = row1[i2];
        const double k22 = row2[i2];
        const double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 1e-12) {
            a2 = std::clamp(a2_old + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // Flat curvature: the dual is linear along the constraint line.
            const double slope = y2 * (e1 - e2);
            if (slope > 1e-12) {
                a2 = hi;
            } else if (slope < -1e-12) {
                a2 = lo;
            } else {
                return false;
            }
        }
        if (a2 < 1e-12 * C) {
            a2 = 0.0;
        } else if (a2 > C * (1.0 - 1e-12)) {
            a2 = C;
        }
        if (std::fabs(a2 - a2_old) < 1e-12 * (a2 + a2_old + 1e-12)) {
            return false;
        }
        double a1 = a1_old + s * (a2_old - a2);
        if (a1 < 1e-12 * C) {
            a1 = 0.0;
        } else if (a1 > C * (1.0 - 1e-12)) {
            a1 = C;
        }

        const double d1 = y1 * (a1 - a1_old);
        const double d2 = y2 * (a2 - a2_old);
        const double g1 = e1 + y1 - b_;
        const double g2 = e2 + y2 - b_;
        dual_ += (a1 - a1_old) + (a2 - a2_old) - (d1 * g1 + d2 * g2) -
                 0.5 * (d1 * d1 * k11 + d2 * d2 * k22 + 2.0 * d1 * d2 * k12);

        const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
        const bool free1 = a1 > 0.0 && a1 < C;
        const bool free2 = a2 > 0.0 && a2 < C;
        const double b_new = free1 ? b1 : (free2 ? b2 : 0.5 * (b1 + b2));
        const double db = b_new - b_;

        free_count_ += (free1 ? 1 : 0) - (is_free(i1) ? 1 : 0);
        free_count_ += (free2 ? 1 : 0) - (is_free(i2) ? 1 : 0);
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        b_ = b_new;
        for (std::size_t k = 0; k < n_; ++k) {
            error_[k] += d1 * row1[k] + d2 * row2[k] + db;
        }
        ++updates_;
        if (p_.record_dual_trace) {
            trace_.push_back(dual_);
        }
        if (!std::isfinite(b_) || !std::isfinite(dual_)) {
            throw NumericalError("smo: non-finite state after a pair update");
        }
        return true;
    }

    void settle_bias() {
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            const double g = error_[i] + y_[i] - b_;  // f(x_i) without the bias
            const bool at_zero = alpha_[i] <= 0.0;
            // alpha = 0 needs y f >= 1, alpha = C needs y f <= 1.
            if ((y_[i] > 0) == at_zero) {
                lower = std::max(lower, y_[i] - g);
            } else {
                upper = std::min(upper, y_[i] - g);
            }
        }
        double b_new = b_;
        if (lower <= upper) {
            if (std::isfinite(lower) && std::isfinite(upper)) {
                b_new = 0.5 * (lower + upper);
            } else if (std::isfinite(lower)) {
                b_new = std::max(b_, lower);
            } else if (std::isfinite(upper)) {
                b_new = std::min(b_, upper);
            }
        }
        const double db = b_new - b_;
        for (auto& e : error_) {
            e += db;
        }
        b_ = b_new;
    }

    const DenseRows& x_;
    std::span<const double> y_;
    SmoParams p_;
    std::size_t n_;
    KernelRowCache cache_;
    Rng rng_;
    std::vector<double> alpha_;
    std::vector<double> error_;  // f(x_i) - y_i
    double b_ = 0.0;
    double dual_ = 0.0;
    std::size_t free_count_ = 0;
    std::size_t updates_ = 0;
    std::vector<double> trace_;
};

}  // namespace

double rbf(std::span<const double> x1, std::span<const double> x2, double gamma) {
    check_dim(x1.size(), x2.size());
    if (!(gamma > 0)) {
        throw ConfigError("rbf: gamma must be positive");
    }
    return kernels::rbf(x1, x2, gamma);
}

double KernelModel::decision(std::span<const double> x) const {
    if (!support_vectors.empty()) {
        check_dim(dim(), x.size());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < support_vectors.rows(); ++i) {
        s += alpha_y[i] * kernels::rbf(support_vectors.row(i), x, gamma);
    }
    return s + b;
}

void KernelModel::decisions(const DenseRows& x, std::span<double> out) const {
    if (!support_vectors.empty()) {
        check_dim(dim(), x.cols());
    }
    kernels::rbf_decisions(support_vectors, alpha_y, b, gamma, x, out);
}

KernelRowCache::KernelRowCache(const DenseRows& x, double gamma, std::size_t budget_bytes)
    : x_(x), gamma_(gamma), slot_of_(x.rows(), -1) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.rows() * sizeof(double));
    capacity_ = std::clamp<std::size_t>(budget_bytes / row_bytes, 2, std::max<std::size_t>(2, x.rows()));
}

std::span<const double> KernelRowCache::row(std::size_t i) {
    if (slot_of_[i] >= 0) {
        ++hits_;
        const auto slot = static_cast<std::size_t>(slot_of_[i]);
        lru_.splice(lru_.begin(), lru_, where_[slot]);
        return slots_[slot];
    }
    ++misses_;
    std::size_t slot;
    if (slots_.size() < capacity_) {
        slot = slots_.size();
        slots_.emplace_back(x_.rows());
        owner_.push_back(i);
        lru_.push_front(slot);
        where_.push_back(lru_.begin());
    } else {
        slot = lru_.back();
        slot_of_[owner_[slot]] = -1;
        owner_[slot] = i;
        lru_.splice(lru_.begin(), lru_, where_[slot]);
    }
    slot_of_[i] = static_cast<std::ptrdiff_t>(slot);
    kernels::rbf_row(x_, x_.row(i), gamma_, slots_[slot]);
    return slots_[slot];
}

SmoResult fit_smo(const DenseRows& x, std::span<const double> y, const SmoParams& params) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw DataError("fit_smo: need a non-empty training set with one label per row");
    }
    if (!(params.C > 0) || !(params.gamma > 0) || !(params.tol > 0)) {
        throw ConfigError("fit_smo: C, gamma and tol must be positive");
    }
    bool pos = false, neg = false;
    for (double v : y) {
        if (v != 1.0 && v != -1.0) {
            throw DataError("fit_smo: labels must be +1 or -1");
        }
        (v > 0 ? pos : neg) = true;
    }
    if (!pos || !neg) {
        throw DataError("fit_smo: training data holds a single class");
    }
    return SmoSolver(x, y, params).run();
}

DenseRows rows_of(const DevSet& dev) {
    DenseRows x(dev.dim);
    x.reserve(dev.samples.size());
    for (const auto& s : dev.samples) {
        x.push_back(std::span<const double>(s.dvec));
    }
    return x;
}

std::vector<double> labels_of(const DevSet& dev) {
    std::vector<double> y;
    y.reserve(dev.samples.size());
    for (const auto& s : dev.samples) {
        y.push_back(label_sign(s.label));
    }
    return y;
}

SmoResult fit_smo(const DevSet& dev, const SmoParams& params) {
    const auto x = rows_of(dev);
    const auto y = labels_of(dev);
    return fit_smo(x, y, params);
}

double dual_objective(const DenseRows& x, std::span<const double> y, std::span<const double> alpha, double gamma) {
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < x.rows(); ++j) {
            if (alpha[j] != 0.0) {
                quad += alpha[i] * alpha[j] * y[i] * y[j] * kernels::rbf(x.row(i), x.row(j), gamma);
            }
        }
    }
    return linear - 0.5 * quad;
}

KktReport kkt_audit(const DenseRows& x, std::span<const double> y, std::span<const double> alpha, double b,
                    double gamma, double C, double tol) {
    KktReport rep;
    const std::size_t n = x.rows();
    std::vector<double> f(n, b);
    double eq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        eq += alpha[j] * y[j];
    }
    rep.equality_residual = std::fabs(eq);
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] == 0.0) {
            continue;
        }
        kernels::rbf_row(x, x.row(j), gamma, row);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += alpha[j] * y[j] * row[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double margin = y[i] * f[i];
        double violation = 0.0;
        if (alpha[i] < 0.0 || alpha[i] > C) {
            violation = std::max(-alpha[i], alpha[i] - C);
        } else if (alpha[i] == 0.0) {
            violation = std::max(0.0, 1.0 - margin);
        } else if (alpha[i] == C) {
            violation = std::max(0.0, margin - 1.0);
        } else {
            violation = std::fabs(margin - 1.0);
        }
        rep.max_violation = std::max(rep.max_violation, violation);
        if (violation > tol) {
            ++rep.violators;
        }
    }
    rep.ok = rep.violators == 0 && rep.equality_residual <= 1e-8 * std::max(1.0, C * static_cast<double>(n));
    return rep;
}

void save_kernel_model(const KernelModel& m, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.bytes("SHKM", 4);
    w.put<std::uint32_t>(kModelVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.support_vectors.rows()));
    w.put<double>(m.gamma);
    w.put<double>(m.C);
    w.put<double>(m.b);
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
        w.put<double>(m.alpha_y[i]);
        for (double v : m.support_vectors.row(i)) {
            w.put<float>(static_cast<float>(v));
        }
    }
    w.write_to(path.string());
}

KernelModel load_kernel_model(const std::filesystem::path& path) {
    detail::ByteReader in(path.string());
    char magic[4];
    in.bytes(magic, 4, "magic");
    if (std::memcmp(magic, "SHKM", 4) != 0) {
        throw DataError("'" + path.string() + "' is not a kernel model checkpoint (bad magic)");
    }
    if (const auto v = in.get<std::uint32_t>("version"); v != kModelVersion) {
        throw DataError(fmt::format("'{}': unsupported checkpoint version {}", path.string(), v));
    }
    const auto dim = in.get<std::uint32_t>("dim");
    const auto count = in.get<std::uint32_t>("sv_count");
    KernelModel m;
    m.gamma = in.get<double>("gamma");
    m.C = in.get<double>("C");
    m.b = in.get<double>("bias");
    m.support_vectors = DenseRows(dim);
    std::vector<float> sv(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        m.alpha_y.push_back(in.get<double>("alpha_y"));
        in.bytes(sv.data(), dim * sizeof(float), "support vector");
        m.support_vectors.push_back(std::span<const float>(sv));
    }
    return m;
}

}  // namespace shsv
